"""NSL-KDD specifics: the 43-column schema and the attack-family mapping."""

from __future__ import annotations

import json
from importlib import resources

from actalarm.data.tabular import ColumnKind, CsvSchema

FAMILIES = ("normal", "DoS", "Probe", "R2L", "U2R")

_NUMERIC = ColumnKind.NUMERIC
_CATEGORICAL = ColumnKind.CATEGORICAL

_COLUMNS: list[tuple[str, ColumnKind]] = [
    ("duration", _NUMERIC),
    ("protocol_type", _CATEGORICAL),
    ("service", _CATEGORICAL),
    ("flag", _CATEGORICAL),
    ("src_bytes", _NUMERIC),
    ("dst_bytes", _NUMERIC),
    ("land", _NUMERIC),
    ("wrong_fragment", _NUMERIC),
    ("urgent", _NUMERIC),
    ("hot", _NUMERIC),
    ("num_failed_logins", _NUMERIC),
    ("logged_in", _NUMERIC),
    ("num_compromised", _NUMERIC),
    ("root_shell", _NUMERIC),
    ("su_attempted", _NUMERIC),
    ("num_root", _NUMERIC),
    ("num_file_creations", _NUMERIC),
    ("num_shells", _NUMERIC),
    ("num_access_files", _NUMERIC),
    ("num_outbound_cmds", _NUMERIC),
    ("is_host_login", _NUMERIC),
    ("is_guest_login", _NUMERIC),
    ("count", _NUMERIC),
    ("srv_count", _NUMERIC),
    ("serror_rate", _NUMERIC),
    ("srv_serror_rate", _NUMERIC),
    ("rerror_rate", _NUMERIC),
    ("srv_rerror_rate", _NUMERIC),
    ("same_srv_rate", _NUMERIC),
    ("diff_srv_rate", _NUMERIC),
    ("srv_diff_host_rate", _NUMERIC),
    ("dst_host_count", _NUMERIC),
    ("dst_host_srv_count", _NUMERIC),
    ("dst_host_same_srv_rate", _NUMERIC),
    ("dst_host_diff_srv_rate", _NUMERIC),
    ("dst_host_same_src_port_rate", _NUMERIC),
    ("dst_host_srv_diff_host_rate", _NUMERIC),
    ("dst_host_serror_rate", _NUMERIC),
    ("dst_host_srv_serror_rate", _NUMERIC),
    ("dst_host_rerror_rate", _NUMERIC),
    ("dst_host_srv_rerror_rate", _NUMERIC),
    ("label", ColumnKind.LABEL),
    ("difficulty", ColumnKind.IGNORE),
]


def nsl_kdd_schema() -> CsvSchema:
    return CsvSchema(columns=list(_COLUMNS), has_header=False)


def attack_family_map() -> dict[str, str]:
    """Attack name -> family {normal, DoS, Probe, R2L, U2R}, shipped as data."""
    text = resources.files("actalarm.data").joinpath("nsl_kdd_families.json").read_text()
    return json.loads(text)
