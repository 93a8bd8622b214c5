"""Deterministic synthetic stand-in datasets in the real on-disk formats.

Digit/letter glyphs are rendered procedurally (polyline skeletons, random
affine jitter, stroke-width/intensity variation, pixel noise) and written as
IDX files; network flows come out as NSL-KDD-shaped 43-column CSVs with
class-dependent feature distributions and attack-name labels. Everything is
a pure function of the seed, so demo corpora are reproducible byte for byte.
"""

from __future__ import annotations

import csv
import math
from pathlib import Path

import numpy as np

from actalarm.data.idx import write_idx_images, write_idx_labels
from actalarm.util import derive_rng


def _arc(cx, cy, rx, ry, a0, a1, n=12):
    angles = np.linspace(a0, a1, n)
    return [(cx + rx * math.cos(a), cy + ry * math.sin(a)) for a in angles]


def _circle(cx, cy, rx, ry):
    return _arc(cx, cy, rx, ry, 0.0, 2 * math.pi, 16)


# Polyline skeletons on a unit canvas, y pointing down. The anomaly-side
# classes of the experiment matrix (6..9) are composite symbols - overlaid
# strokes of two base shapes, like overwritten or corrected characters - so
# the unseen-class detection task resembles flagging scribbled-over digits.
GLYPHS: dict[str, list[list[tuple[float, float]]]] = {
    "0": [_circle(0.5, 0.5, 0.21, 0.32)],
    "1": [[(0.36, 0.32), (0.54, 0.15), (0.54, 0.85)], [(0.38, 0.85), (0.7, 0.85)]],
    "2": [_arc(0.5, 0.33, 0.2, 0.18, math.pi, 2 * math.pi)
          + [(0.7, 0.45), (0.3, 0.85), (0.72, 0.85)]],
    "3": [_arc(0.48, 0.32, 0.19, 0.16, -0.75 * math.pi, 0.5 * math.pi)
          + _arc(0.48, 0.66, 0.21, 0.18, -0.5 * math.pi, 0.75 * math.pi)],
    "4": [[(0.62, 0.15), (0.28, 0.62), (0.76, 0.62)], [(0.62, 0.15), (0.62, 0.85)]],
    "5": [[(0.7, 0.15), (0.33, 0.15), (0.33, 0.47)],
          _arc(0.47, 0.64, 0.2, 0.19, -0.45 * math.pi, 0.7 * math.pi)],
    "6": [_circle(0.5, 0.5, 0.21, 0.32),
          [(0.7, 0.15), (0.33, 0.15), (0.33, 0.47)],
          _arc(0.47, 0.64, 0.2, 0.19, -0.45 * math.pi, 0.7 * math.pi)],
    "7": [[(0.36, 0.32), (0.54, 0.15), (0.54, 0.85)], [(0.38, 0.85), (0.7, 0.85)],
          _arc(0.5, 0.33, 0.2, 0.18, math.pi, 2 * math.pi)
          + [(0.7, 0.45), (0.3, 0.85), (0.72, 0.85)]],
    "8": [_circle(0.5, 0.5, 0.21, 0.32),
          _arc(0.48, 0.32, 0.19, 0.16, -0.75 * math.pi, 0.5 * math.pi)
          + _arc(0.48, 0.66, 0.21, 0.18, -0.5 * math.pi, 0.75 * math.pi)],
    "9": [[(0.62, 0.15), (0.28, 0.62), (0.76, 0.62)], [(0.62, 0.15), (0.62, 0.85)],
          [(0.7, 0.15), (0.33, 0.15), (0.33, 0.47)],
          _arc(0.47, 0.64, 0.2, 0.19, -0.45 * math.pi, 0.7 * math.pi)],
    "A": [[(0.28, 0.85), (0.5, 0.15), (0.72, 0.85)], [(0.37, 0.6), (0.63, 0.6)]],
    "B": [[(0.33, 0.15), (0.33, 0.85)],
          _arc(0.33, 0.32, 0.22, 0.17, -0.5 * math.pi, 0.5 * math.pi),
          _arc(0.33, 0.67, 0.26, 0.18, -0.5 * math.pi, 0.5 * math.pi)],
    "C": [_arc(0.52, 0.5, 0.22, 0.33, 0.4 * math.pi, 1.6 * math.pi)],
    "D": [[(0.33, 0.15), (0.33, 0.85)],
          _arc(0.33, 0.5, 0.28, 0.35, -0.5 * math.pi, 0.5 * math.pi)],
    "E": [[(0.68, 0.15), (0.33, 0.15), (0.33, 0.85), (0.68, 0.85)], [(0.33, 0.5), (0.6, 0.5)]],
    "V": [[(0.28, 0.15), (0.5, 0.85), (0.72, 0.15)]],
    "W": [[(0.25, 0.15), (0.38, 0.85), (0.5, 0.38), (0.62, 0.85), (0.75, 0.15)]],
    "X": [[(0.3, 0.15), (0.7, 0.85)], [(0.7, 0.15), (0.3, 0.85)]],
    "Y": [[(0.3, 0.15), (0.5, 0.48)], [(0.7, 0.15), (0.5, 0.48)], [(0.5, 0.48), (0.5, 0.85)]],
    "Z": [[(0.3, 0.15), (0.7, 0.15), (0.3, 0.85), (0.7, 0.85)]],
}

DIGIT_NAMES = [str(d) for d in range(10)]
LETTER_NAMES = [chr(ord("A") + i) for i in range(26)]


def _segments(strokes) -> np.ndarray:
    segs = []
    for stroke in strokes:
        for a, b in zip(stroke[:-1], stroke[1:]):
            segs.append((a, b))
    return np.asarray(segs)  # (m, 2, 2)


_GRID_CACHE: dict[int, np.ndarray] = {}


def _grid(size: int) -> np.ndarray:
    if size not in _GRID_CACHE:
        centers = (np.arange(size) + 0.5) / size
        gx, gy = np.meshgrid(centers, centers)
        _GRID_CACHE[size] = np.stack([gx.ravel(), gy.ravel()], axis=1)
    return _GRID_CACHE[size]


def render_glyph(symbol: str, rng: np.random.Generator, size: int = 28) -> np.ndarray:
    """One jittered uint8 raster of the symbol's skeleton.

    Besides affine jitter, strokes are occasionally dropped or extra short
    strokes added, so per-class appearance overlaps the way handwriting does
    and reconstruction error alone cannot cleanly isolate unseen classes.
    """
    segs = _segments(GLYPHS[symbol]).copy()
    if segs.shape[0] > 2 and rng.random() < 0.27:
        segs = np.delete(segs, rng.integers(0, segs.shape[0]), axis=0)
    if rng.random() < 0.32:
        start = rng.uniform(0.25, 0.75, size=2)
        extra = np.stack([start, start + rng.uniform(-0.22, 0.22, size=2)])
        segs = np.concatenate([segs, extra[None]], axis=0)
    pts = segs.reshape(-1, 2) - 0.5

    angle = rng.uniform(-0.24, 0.24)
    scale = rng.uniform(0.75, 1.15, size=2)
    shear = rng.uniform(-0.2, 0.2)
    cos_a, sin_a = math.cos(angle), math.sin(angle)
    transform = np.array([[cos_a, -sin_a], [sin_a, cos_a]]) @ np.array([[1.0, shear], [0.0, 1.0]])
    pts = (pts * scale) @ transform.T + 0.5 + rng.uniform(-0.07, 0.07, size=2)
    segs = pts.reshape(-1, 2, 2)

    grid = _grid(size)
    p0, p1 = segs[:, 0], segs[:, 1]
    v = p1 - p0                                           # (m, 2)
    lengths = np.maximum(np.einsum("md,md->m", v, v), 1e-12)
    rel = grid[None, :, :] - p0[:, None, :]               # (m, g, 2)
    t = np.clip(np.einsum("mgd,md->mg", rel, v) / lengths[:, None], 0.0, 1.0)
    proj = p0[:, None, :] + t[..., None] * v[:, None, :]
    dist2 = np.sum((grid[None] - proj) ** 2, axis=2).min(axis=0)

    width = rng.uniform(0.028, 0.055)
    # saturated stroke cores: scaling the profile above 1 and clipping gives
    # the flat-topped pen strokes handwriting scans have
    img = rng.uniform(1.15, 1.6) * np.exp(-dist2 / (2.0 * width * width))
    return (np.clip(img, 0.0, 1.0) * 255).astype(np.uint8).reshape(size, size)


def glyph_images(symbols: list[str], labels: np.ndarray, seed: int) -> np.ndarray:
    """(n, 28, 28) uint8 stack; ``labels`` index into ``symbols``."""
    rng = derive_rng(seed, "glyphs")
    return np.stack([render_glyph(symbols[lab], rng) for lab in labels])


def write_digit_corpus(out_dir: str | Path, n_train: int = 24000, n_test: int = 4000,
                       seed: int = 0) -> dict[str, Path]:
    """MNIST-shaped surrogate: IDX train/test files with balanced digit classes."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rng = derive_rng(seed, "digit-labels")
    paths = {}
    for split, n, img_name, lab_name in [
        ("train", n_train, "train-images-idx3-ubyte", "train-labels-idx1-ubyte"),
        ("test", n_test, "t10k-images-idx3-ubyte", "t10k-labels-idx1-ubyte"),
    ]:
        labels = rng.integers(0, 10, size=n).astype(np.uint8)
        images = glyph_images(DIGIT_NAMES, labels, seed=seed + (1 if split == "test" else 0))
        write_idx_images(images, out_dir / img_name)
        write_idx_labels(labels, out_dir / lab_name)
        paths[f"{split}_images"] = out_dir / img_name
        paths[f"{split}_labels"] = out_dir / lab_name
    return paths


def write_letter_corpus(out_dir: str | Path, n_train: int = 8000, n_test: int = 1500,
                        seed: int = 0) -> dict[str, Path]:
    """EMNIST-letters-shaped surrogate: labels 1..26 for A..Z, uppercase glyphs."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rng = derive_rng(seed, "letter-labels")
    paths = {}
    for split, n, img_name, lab_name in [
        ("train", n_train, "emnist-letters-train-images-idx3-ubyte",
         "emnist-letters-train-labels-idx1-ubyte"),
        ("test", n_test, "emnist-letters-test-images-idx3-ubyte",
         "emnist-letters-test-labels-idx1-ubyte"),
    ]:
        # only the letters the experiment matrix uses get rendered
        used = [LETTER_NAMES.index(c) for c in ["A", "B", "C", "D", "E",
                                                "V", "W", "X", "Y", "Z"]]
        indices = rng.choice(used, size=n)
        images = glyph_images(LETTER_NAMES, indices, seed=seed + (3 if split == "test" else 2))
        write_idx_images(images, out_dir / img_name)
        write_idx_labels((indices + 1).astype(np.uint8), out_dir / lab_name)  # A = 1
        paths[f"{split}_images"] = out_dir / img_name
        paths[f"{split}_labels"] = out_dir / lab_name
    return paths


# -- NSL-KDD-shaped flows ----------------------------------------------------

# (attack name, family weight within file) per class family
_ATTACKS = {
    "normal": ["normal"],
    "DoS": ["neptune", "smurf", "back"],
    "Probe": ["satan", "ipsweep", "portsweep"],
    "R2L": ["guess_passwd", "warezclient"],
    "U2R": ["buffer_overflow", "rootkit"],
}
_TEST_ONLY_ATTACKS = {"DoS": ["apache2"], "Probe": ["mscan"]}

_FAMILY_MIX = [("normal", 0.53), ("DoS", 0.33), ("Probe", 0.10),
               ("R2L", 0.03), ("U2R", 0.01)]

_PROTOCOLS = ["tcp", "udp", "icmp"]
_SERVICES = ["http", "private", "domain_u", "smtp", "ftp_data", "telnet", "other"]
_FLAGS = ["SF", "S0", "REJ", "RSTR"]

# per family: categorical probabilities and (mean, std) of informative numerics
_FLOW_PROFILE = {
    "normal": {
        "protocol": [0.70, 0.22, 0.08], "service": [0.45, 0.05, 0.18, 0.12, 0.08, 0.02, 0.10],
        "flag": [0.85, 0.04, 0.07, 0.04],
        "duration": (18, 40), "src_bytes": (900, 700), "dst_bytes": (2200, 1800),
        "logged_in": 0.72, "count": (9, 6), "srv_count": (7, 5),
        "serror_rate": (0.04, 0.05), "same_srv_rate": (0.92, 0.1),
        "diff_srv_rate": (0.04, 0.05), "dst_host_count": (120, 70),
        "num_failed_logins": (0.02, 0.15), "hot": (0.1, 0.4), "root_shell": 0.002,
    },
    "DoS": {
        "protocol": [0.78, 0.08, 0.14], "service": [0.30, 0.45, 0.04, 0.06, 0.04, 0.02, 0.09],
        "flag": [0.30, 0.42, 0.20, 0.08],
        "duration": (6, 20), "src_bytes": (240, 380), "dst_bytes": (260, 480),
        "logged_in": 0.18, "count": (90, 90), "srv_count": (70, 80),
        "serror_rate": (0.45, 0.33), "same_srv_rate": (0.55, 0.3),
        "diff_srv_rate": (0.07, 0.08), "dst_host_count": (185, 75),
        "num_failed_logins": (0.0, 0.05), "hot": (0.04, 0.2), "root_shell": 0.0,
    },
    "Probe": {
        "protocol": [0.60, 0.16, 0.24], "service": [0.16, 0.45, 0.07, 0.05, 0.07, 0.04, 0.16],
        "flag": [0.45, 0.18, 0.24, 0.13],
        "duration": (12, 30), "src_bytes": (180, 300), "dst_bytes": (280, 600),
        "logged_in": 0.22, "count": (40, 42), "srv_count": (10, 9),
        "serror_rate": (0.18, 0.18), "same_srv_rate": (0.45, 0.28),
        "diff_srv_rate": (0.38, 0.26), "dst_host_count": (170, 75),
        "num_failed_logins": (0.01, 0.1), "hot": (0.06, 0.25), "root_shell": 0.001,
    },
    "R2L": {
        "protocol": [0.92, 0.05, 0.03], "service": [0.10, 0.05, 0.02, 0.08, 0.42, 0.25, 0.08],
        "flag": [0.62, 0.08, 0.18, 0.12],
        "duration": (95, 80), "src_bytes": (420, 380), "dst_bytes": (650, 520),
        "logged_in": 0.38, "count": (4, 3), "srv_count": (4, 3),
        "serror_rate": (0.08, 0.1), "same_srv_rate": (0.75, 0.2),
        "diff_srv_rate": (0.1, 0.1), "dst_host_count": (60, 50),
        "num_failed_logins": (2.6, 1.4), "hot": (1.8, 1.2), "root_shell": 0.02,
    },
    "U2R": {
        "protocol": [0.95, 0.03, 0.02], "service": [0.12, 0.04, 0.02, 0.06, 0.18, 0.50, 0.08],
        "flag": [0.80, 0.04, 0.08, 0.08],
        "duration": (140, 110), "src_bytes": (700, 500), "dst_bytes": (900, 600),
        "logged_in": 0.85, "count": (3, 2), "srv_count": (3, 2),
        "serror_rate": (0.05, 0.08), "same_srv_rate": (0.82, 0.15),
        "diff_srv_rate": (0.08, 0.08), "dst_host_count": (25, 25),
        "num_failed_logins": (0.8, 0.9), "hot": (3.2, 1.6), "root_shell": 0.65,
    },
}


def _flow_row(family: str, attack: str, rng: np.random.Generator,
              unknown_service: bool = False) -> list[str]:
    prof = _FLOW_PROFILE[family]

    def pos(mean, std):
        return max(0.0, rng.normal(mean, std))

    def rate(mean, std):
        return float(np.clip(rng.normal(mean, std), 0.0, 1.0))

    protocol = _PROTOCOLS[rng.choice(len(_PROTOCOLS), p=prof["protocol"])]
    service = "http_8001" if unknown_service else \
        _SERVICES[rng.choice(len(_SERVICES), p=prof["service"])]
    flag = _FLAGS[rng.choice(len(_FLAGS), p=prof["flag"])]
    logged_in = int(rng.random() < prof["logged_in"])
    root_shell = int(rng.random() < prof["root_shell"])
    failed = int(round(pos(*prof["num_failed_logins"])))
    hot = int(round(pos(*prof["hot"])))
    values = {
        "duration": f"{pos(*prof['duration']):.0f}",
        "protocol_type": protocol,
        "service": service,
        "flag": flag,
        "src_bytes": f"{pos(*prof['src_bytes']):.0f}",
        "dst_bytes": f"{pos(*prof['dst_bytes']):.0f}",
        "land": "0",
        "wrong_fragment": str(int(rng.random() < (0.08 if family == "DoS" else 0.003))),
        "urgent": "0",
        "hot": str(hot),
        "num_failed_logins": str(failed),
        "logged_in": str(logged_in),
        "num_compromised": str(int(round(pos(0.4, 0.8))) if family == "U2R" else "0"),
        "root_shell": str(root_shell),
        "su_attempted": str(int(rng.random() < (0.3 if family == "U2R" else 0.002))),
        "num_root": str(int(round(pos(1.5, 1.2))) if family == "U2R" else "0"),
        "num_file_creations": str(int(round(pos(1.0, 1.0))) if family == "U2R" else "0"),
        "num_shells": str(int(rng.random() < (0.4 if family == "U2R" else 0.001))),
        "num_access_files": str(int(rng.random() < 0.02)),
        "num_outbound_cmds": "0",
        "is_host_login": "0",
        "is_guest_login": str(int(rng.random() < (0.25 if family == "R2L" else 0.01))),
        "count": f"{pos(*prof['count']):.0f}",
        "srv_count": f"{pos(*prof['srv_count']):.0f}",
        "serror_rate": f"{rate(*prof['serror_rate']):.2f}",
        "srv_serror_rate": f"{rate(*prof['serror_rate']):.2f}",
        "rerror_rate": f"{rate(0.1 if family != 'Probe' else 0.3, 0.1):.2f}",
        "srv_rerror_rate": f"{rate(0.1 if family != 'Probe' else 0.3, 0.1):.2f}",
        "same_srv_rate": f"{rate(*prof['same_srv_rate']):.2f}",
        "diff_srv_rate": f"{rate(*prof['diff_srv_rate']):.2f}",
        "srv_diff_host_rate": f"{rate(0.1, 0.1):.2f}",
        "dst_host_count": f"{min(255, pos(*prof['dst_host_count'])):.0f}",
        "dst_host_srv_count": f"{min(255, pos(prof['dst_host_count'][0] * 0.6, 50)):.0f}",
        "dst_host_same_srv_rate": f"{rate(*prof['same_srv_rate']):.2f}",
        "dst_host_diff_srv_rate": f"{rate(*prof['diff_srv_rate']):.2f}",
        "dst_host_same_src_port_rate": f"{rate(0.15, 0.15):.2f}",
        "dst_host_srv_diff_host_rate": f"{rate(0.1, 0.1):.2f}",
        "dst_host_serror_rate": f"{rate(*prof['serror_rate']):.2f}",
        "dst_host_srv_serror_rate": f"{rate(*prof['serror_rate']):.2f}",
        "dst_host_rerror_rate": f"{rate(0.1, 0.1):.2f}",
        "dst_host_srv_rerror_rate": f"{rate(0.1, 0.1):.2f}",
        "label": attack,
        "difficulty": str(int(rng.integers(10, 22))),
    }
    from actalarm.data.nsl_kdd import _COLUMNS
    return [values[name] for name, _ in _COLUMNS]


def write_netflow_corpus(out_dir: str | Path, n_train: int = 25000, n_test: int = 5000,
                         seed: int = 0) -> dict[str, Path]:
    """NSL-KDD-shaped surrogate: KDDTrain+.txt / KDDTest+.txt with attack-name
    labels; the test file carries novel attack names and an unseen service level."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    families = [f for f, _ in _FAMILY_MIX]
    weights = np.array([w for _, w in _FAMILY_MIX])
    paths = {}
    for split, n, fname in [("train", n_train, "KDDTrain+.txt"),
                            ("test", n_test, "KDDTest+.txt")]:
        rng = derive_rng(seed, "netflow", split)
        with open(out_dir / fname, "w", newline="") as fh:
            writer = csv.writer(fh)
            for _ in range(n):
                family = families[rng.choice(len(families), p=weights)]
                pool = list(_ATTACKS[family])
                if split == "test" and family in _TEST_ONLY_ATTACKS and rng.random() < 0.2:
                    pool = _TEST_ONLY_ATTACKS[family]
                attack = pool[rng.integers(0, len(pool))]
                unknown_service = split == "test" and rng.random() < 0.01
                writer.writerow(_flow_row(family, attack, rng, unknown_service))
        paths[split] = out_dir / fname
    return paths


def write_creditcard_corpus(out_dir: str | Path, n: int = 20000, fraud_share: float = 0.01,
                            seed: int = 0) -> Path:
    """Anonymized-transactions surrogate: Time, V1..V28, Amount, Class header CSV."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rng = derive_rng(seed, "creditcard")
    path = out_dir / "creditcard.csv"
    header = ["Time"] + [f"V{i}" for i in range(1, 29)] + ["Amount", "Class"]
    shift = rng.uniform(-2.5, 2.5, size=28) * (rng.random(28) < 0.3)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for _ in range(n):
            fraud = rng.random() < fraud_share
            vs = rng.standard_normal(28) + (shift if fraud else 0.0)
            amount = abs(rng.normal(250 if fraud else 70, 120 if fraud else 60))
            writer.writerow([f"{rng.uniform(0, 172800):.0f}",
                             *[f"{v:.6f}" for v in vs],
                             f"{amount:.2f}", "1" if fraud else "0"])
    return path
