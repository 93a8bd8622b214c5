"""Detector bundles: one deterministic archive per trained pipeline.

A bundle is a ZIP (stored, fixed timestamps, fixed member order) holding the
frozen target, the alarm, the generator (spec or full VAE parts) and the
preprocessing metadata needed to replay scoring on raw files. Identical
detectors always produce identical bundle bytes.
"""

from __future__ import annotations

import io
import json
import zipfile
from pathlib import Path

from actalarm.alarm import Detector
from actalarm.generators import (
    NoiseGenerator,
    NoiseGenSpec,
    VaeGenerator,
    vae_from_parts,
    vae_to_parts,
)
from actalarm.nn import network_from_bytes, network_to_bytes

FORMAT_VERSION = 1
_EPOCH = (1980, 1, 1, 0, 0, 0)  # fixed zip timestamps keep bundle bytes deterministic


def _add(archive: zipfile.ZipFile, name: str, payload: bytes) -> None:
    info = zipfile.ZipInfo(name, date_time=_EPOCH)
    info.compress_type = zipfile.ZIP_STORED
    archive.writestr(info, payload)


def bundle_to_bytes(detector: Detector, preprocessing: dict,
                    manifest_extra: dict | None = None) -> bytes:
    if isinstance(detector.generator, NoiseGenerator):
        generator_doc = detector.generator.spec.to_dict()
        vae_parts = None
    elif isinstance(detector.generator, VaeGenerator):
        vae_parts = vae_to_parts(detector.generator.vae)
        generator_doc = dict(vae_parts["spec"])
    else:
        raise TypeError(f"cannot bundle generator {type(detector.generator).__name__}")

    manifest = {
        "format": FORMAT_VERSION,
        "generator": generator_doc,
        "preprocessing": preprocessing,
    }
    manifest.update(manifest_extra or {})

    buf = io.BytesIO()
    with zipfile.ZipFile(buf, "w") as archive:
        _add(archive, "manifest.json", json.dumps(manifest, sort_keys=True, indent=2).encode())
        _add(archive, "target.net", network_to_bytes(detector.target))
        _add(archive, "alarm.net", network_to_bytes(detector.alarm))
        if vae_parts is not None:
            for part in ("trunk", "mu_head", "logvar_head", "decoder"):
                _add(archive, f"vae/{part}.net", vae_parts[part])
    return buf.getvalue()


def save_bundle(detector: Detector, preprocessing: dict, path: str | Path,
                manifest_extra: dict | None = None) -> None:
    Path(path).write_bytes(bundle_to_bytes(detector, preprocessing, manifest_extra))


def load_bundle(path: str | Path) -> tuple[Detector, dict]:
    """Rebuild the detector and return it with the manifest."""
    with zipfile.ZipFile(Path(path)) as archive:
        manifest = json.loads(archive.read("manifest.json"))
        if manifest.get("format") != FORMAT_VERSION:
            raise ValueError(f"unsupported bundle format {manifest.get('format')}")
        target = network_from_bytes(archive.read("target.net")).freeze()
        alarm = network_from_bytes(archive.read("alarm.net"))
        gen_doc = dict(manifest["generator"])
        kind = gen_doc.pop("kind")
        if kind == "noise":
            generator = NoiseGenerator(NoiseGenSpec(**gen_doc))
        elif kind == "vae":
            parts = {part: archive.read(f"vae/{part}.net")
                     for part in ("trunk", "mu_head", "logvar_head", "decoder")}
            parts["spec"] = {"kind": "vae", **gen_doc}
            generator = VaeGenerator(vae_from_parts(parts))
        else:
            raise ValueError(f"unknown generator kind {kind!r}")
    return Detector(target, alarm, generator), manifest
