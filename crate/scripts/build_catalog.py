#!/usr/bin/env python3
"""Regenerate data/catalog/*.nk from the refractiveindex.info database.

The database snapshot comes from the `refidx` wheel (the data is CC0):

    pip download --no-deps refidx==1.3.0
    python3 scripts/build_catalog.py refidx-1.3.0-py3-none-any.whl data/catalog

Only materials whose data covers 250-2500 nm (optionally stitched from two
datasets of the same material) are exported.
"""

import io
import re
import sys
import zipfile
from pathlib import Path

import numpy as np

LO_UM, HI_UM = 0.25, 2.5
WINDOW_UM = (0.24, 2.6)
MAX_SAMPLES = 600

METALS = {
    "Ag", "Al", "Au", "Be", "Bi", "Cr", "Cu", "Fe", "Hg", "Ir", "Li", "Lu",
    "Mg", "Mn", "Mo", "Ni", "Os", "Pd", "Pt", "Rh", "Ti", "W", "Zr", "Nb",
    "Zn", "Ta", "Pb", "Co", "V", "Sn", "In", "Ga", "Na", "K", "Ca", "Re",
}
ALLOY_SHELVES = {"alloys"}
SEMICONDUCTOR_SHELVES = {"semiconductor alloys", "perovskite"}


def formula(lam, c, num):
    c = list(c)
    if num == 1:
        eps = 1 + c[0]
        for i in range(1, len(c) - 1, 2):
            eps += c[i] * lam**2 / (lam**2 - c[i + 1] ** 2)
        return np.sqrt(eps)
    if num == 2:
        eps = 1 + c[0]
        for i in range(1, len(c) - 1, 2):
            eps += c[i] * lam**2 / (lam**2 - c[i + 1])
        return np.sqrt(eps)
    if num == 3:
        eps = c[0]
        for i in range(1, len(c) - 1, 2):
            eps += c[i] * lam ** c[i + 1]
        return np.sqrt(eps)
    if num == 4:
        c = c + [0.0] * (17 - len(c))
        eps = c[0]
        eps += c[1] * lam ** c[2] / (lam**2 - c[3] ** c[4])
        eps += c[5] * lam ** c[6] / (lam**2 - c[7] ** c[8])
        for i in range(9, 17, 2):
            eps += c[i] * lam ** c[i + 1]
        return np.sqrt(eps)
    if num == 5:
        n = c[0]
        for i in range(1, len(c) - 1, 2):
            n += c[i] * lam ** c[i + 1]
        return n
    if num == 6:
        n = 1 + c[0]
        for i in range(1, len(c) - 1, 2):
            n += c[i] / (c[i + 1] - lam ** (-2))
        return n
    raise ValueError(f"unsupported formula {num}")


def page_range(entry):
    data = entry["DATA"]
    if data["type"].startswith("tabulated"):
        w = data["wavelengths"]
        return min(w), max(w)
    r = data["wavelength_range"]
    return float(r[0]), float(r[1])


def sample_page(entry, lo, hi):
    """(lambda_um, n, k) samples of one dataset restricted to [lo, hi]."""
    data = entry["DATA"]
    kind = data["type"]
    if kind == "tabulated nk" or kind == "tabulated n":
        w = np.asarray(data["wavelengths"], dtype=float)
        idx = np.asarray(data["index"])
        n = np.real(idx).astype(float)
        k = np.imag(idx).astype(float) if kind == "tabulated nk" else np.zeros_like(n)
        order = np.argsort(w)
        w, n, k = w[order], n[order], k[order]
        keep = np.ones_like(w, dtype=bool)
        keep[1:] = np.diff(w) > 0
        w, n, k = w[keep], n[keep], k[keep]
        # keep one bracketing sample on each side of the window
        i0 = max(np.searchsorted(w, lo, side="right") - 1, 0)
        i1 = min(np.searchsorted(w, hi, side="left") + 1, len(w))
        w, n, k = w[i0:i1], n[i0:i1], k[i0:i1]
        if len(w) > MAX_SAMPLES:
            stride = int(np.ceil(len(w) / MAX_SAMPLES))
            pick = np.unique(np.concatenate([np.arange(0, len(w), stride), [len(w) - 1]]))
            w, n, k = w[pick], n[pick], k[pick]
        return w, n, k
    if kind.startswith("formula"):
        num = int(kind.split()[1])
        r0, r1 = page_range(entry)
        a, b = max(lo, r0), min(hi, r1)
        w = np.unique(np.concatenate([np.arange(np.ceil(a * 100) / 100, b, 0.01), [a, b]]))
        n = np.real(formula(w, data["coefficients"], num))
        return w, n, np.zeros_like(n)
    raise ValueError(kind)


def is_temperature_variant(page):
    return bool(re.search(r"-\d+(K|C)$", page))


def choose(pages):
    """Pick (base, tail) datasets covering [LO_UM, HI_UM]; tail may be None."""
    full = []
    for name, entry in pages.items():
        try:
            lo, hi = page_range(entry)
        except Exception:
            continue
        if lo <= LO_UM and hi >= HI_UM:
            full.append((name, entry))

    def rank(item):
        name, entry = item
        kind = entry["DATA"]["type"]
        score = {"tabulated nk": 0, "tabulated n": 2}.get(kind, 1)
        return (score, is_temperature_variant(name), name)

    good_kinds = ("tabulated nk", "tabulated n", "formula 1", "formula 2",
                  "formula 3", "formula 4", "formula 5", "formula 6")
    full = [p for p in full if p[1]["DATA"]["type"] in good_kinds]
    if full:
        return sorted(full, key=rank)[0], None

    bases = []
    for name, entry in pages.items():
        if entry["DATA"]["type"] != "tabulated nk":
            continue
        lo, hi = page_range(entry)
        if lo <= LO_UM:
            bases.append((hi, name, entry))
    for hi, name, entry in sorted(bases, key=lambda b: (-b[0], b[1])):
        tails = []
        for tname, tentry in pages.items():
            if tname == name or tentry["DATA"]["type"] not in good_kinds:
                continue
            tlo, thi = page_range(tentry)
            if tlo <= hi and thi >= HI_UM:
                tails.append((tname, tentry))
        if tails:
            return (name, entry), sorted(tails, key=rank)[0]
    return None


def categorize(shelf, book, w, n, k):
    vis_ir = (w >= 0.4) & (w <= 2.5)
    kmax = float(np.max(k[vis_ir])) if np.any(vis_ir) else float(np.max(k))
    k_ir = float(np.interp(2.5, w, k))
    n_ir = float(np.interp(2.5, w, n))
    if shelf in ALLOY_SHELVES:
        return "Alloy"
    if book in METALS:
        return "Metal"
    if k_ir > 1.5 and k_ir > n_ir:
        return "Alloy"
    if kmax < 1e-2:
        return "Transparent"
    if shelf in SEMICONDUCTOR_SHELVES:
        return "Semiconductor"
    if re.search(r"O\d*|F\d*$|F\d", book) and not re.search(r"Os", book):
        return "Dielectric"
    if shelf in ("organic",) or "polymer" in shelf or "organic" in shelf:
        return "Dielectric"
    return "Semiconductor"


def walk(node, path):
    if isinstance(node, dict) and "DATA" in node:
        yield path, node
        return
    if isinstance(node, dict):
        for key, value in node.items():
            yield from walk(value, path + [key])


def main():
    wheel, out = Path(sys.argv[1]), Path(sys.argv[2])
    with zipfile.ZipFile(wheel) as zf:
        blob = zf.read("refidx/database.npz")
    db = np.load(io.BytesIO(blob), allow_pickle=True)["database"].tolist()

    books = {}
    for shelf in ("main", "other", "glass", "organic"):
        for path, entry in walk(db[shelf], [shelf]):
            key = tuple(path[:-1])
            books.setdefault(key, {})[path[-1]] = entry

    out.mkdir(parents=True, exist_ok=True)
    for old in out.glob("*.nk"):
        old.unlink()

    written, names = 0, set()
    for key in sorted(books):
        choice = choose(books[key])
        if choice is None:
            continue
        (bname, bentry), tail = choice
        w, n, k = sample_page(bentry, *WINDOW_UM)
        source = "/".join(key + (bname,))
        if tail is not None:
            tname, tentry = tail
            tw, tn, tk = sample_page(tentry, *WINDOW_UM)
            cut = w[-1]
            sel = tw > cut
            w = np.concatenate([w, tw[sel]])
            n = np.concatenate([n, tn[sel]])
            k = np.concatenate([k, tk[sel]])
            source += " + " + tname
        k = np.where((k < 0) & (k > -1e-6), 0.0, k)
        w = np.array([float(f"{x * 1000:.6g}") for x in w])
        n = np.array([float(f"{x:.6g}") for x in n])
        k = np.array([float(f"{x:.6g}") for x in k])
        keep = np.ones_like(w, dtype=bool)
        keep[1:] = np.diff(w) > 0
        w, n, k = w[keep], n[keep], k[keep]
        if np.any(n <= 0) or np.any(k < 0) or not np.all(np.isfinite(n)):
            print("skip (invalid values)", source, file=sys.stderr)
            continue
        if w[0] > LO_UM * 1000 or w[-1] < HI_UM * 1000 or np.any(np.diff(w) <= 0):
            print("skip (coverage)", source, file=sys.stderr)
            continue
        shelf, book = key[0], key[-1]
        name = re.sub(r"[^A-Za-z0-9().+_-]+", "_", book)
        if name in names:
            continue
        names.add(name)
        category = categorize(key[-2] if len(key) > 2 else shelf, book, w / 1000, n, k)
        lines = [f"# name={name} category={category}",
                 f"# source: refractiveindex.info {source}",
                 "# lambda_nm n k"]
        for wl, nv, kv in zip(w, n, k):
            lines.append(f"{wl:.6g} {nv:.6g} {kv:.6g}")
        (out / f"{name}.nk").write_text("\n".join(lines) + "\n")
        written += 1
    print(f"wrote {written} materials to {out}")


if __name__ == "__main__":
    main()
