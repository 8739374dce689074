"""Command line front end.

Every run writes its outputs plus ``<prefix>manifest.json`` (parameters,
seed, library versions) into ``--out``.  Exit status: 0 success, 2 invalid
input, 1 computation failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import platform
import sys
from fractions import Fraction
from importlib import metadata

import numpy as np

from . import __version__
from .algebra import ValidationError
from .cutproject import SCHEMES, ProjectionScheme, generate, scheme_from_dict
from .diffraction import model_set_spectrum
from .equivalence import DERIVATION_RULES, derive, extract_atlas, li_difference, ltm_estimate
from .pattern import region_from_string
from .randomtiling import (
    BinaryEnsemble,
    all_rhombus_config,
    block_entropy,
    count_distribution,
    entropy_scan,
    is_valid,
    ladder_entropies,
    mc_sample,
    sample_binary_chain,
)
from .substitution import (
    FIBONACCI,
    FIBONACCI_LENGTHS,
    RULES,
    SymbolicSubstitution,
    build_atlas_by_inflation,
    complexity,
    get_rule,
    seed_tiling,
    substitute,
    word_chain,
)
from .svg import dart_rhombus_svg, disc_plot_svg, points_svg, tiling_svg, write_atomic

SYMBOLIC = {"fibonacci": FIBONACCI}
DESCRIPTOR_KEYS = {"name", "lattice_basis", "physical_rows", "internal", "slices", "module", "module_map", "class_modulus", "metadata"}


def fmt(x) -> str:
    """Fixed 12-significant-digit rendering used for every CSV number."""
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        v = float(x)
        if v == 0.0:
            v = 0.0  # drop negative zero
        return f"{v:.12g}"
    return str(x)


def csv_text(header: list[str], rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([fmt(v) for v in r])
    return buf.getvalue()


# ------------------------------------------------------------- parameters


def _positive(kind=float):
    def parse(text: str):
        v = kind(text)
        if not v > 0:
            raise argparse.ArgumentTypeError(f"must be positive, got {text}")
        return v

    return parse


def _nonneg_int(text: str) -> int:
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError(f"must be non-negative, got {text}")
    return v


def _torus(text: str) -> tuple[int, int]:
    try:
        a, b = (int(v) for v in text.lower().split("x"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"torus must look like 3x4, got {text!r}") from None
    if a < 1 or b < 1:
        raise argparse.ArgumentTypeError("torus dimensions must be positive")
    return a, b


def _gamma(text: str):
    try:
        return tuple(Fraction(v.strip()) for v in text.split(","))
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"cannot parse offset {text!r}") from None


def load_scheme(args) -> ProjectionScheme:
    if getattr(args, "descriptor", None):
        try:
            with open(args.descriptor) as f:
                doc = json.load(f)
        except (OSError, json.JSONDecodeError) as e:
            raise ValidationError(f"cannot read descriptor: {e}") from None
        if not isinstance(doc, dict):
            raise ValidationError("descriptor must be a JSON object")
        extra = set(doc) - DESCRIPTOR_KEYS
        if extra:
            raise ValidationError(f"unknown descriptor fields {sorted(extra)}")
        try:
            return scheme_from_dict(doc)
        except (KeyError, TypeError) as e:
            raise ValidationError(f"malformed descriptor: {e}") from None
    name = args.scheme
    if name not in SCHEMES:
        raise ValidationError(f"unknown scheme {name!r}; choose from {sorted(SCHEMES)}")
    return SCHEMES[name]()


def _check_gamma(scheme: ProjectionScheme, gamma):
    if gamma is not None and len(gamma) != scheme.n:
        raise ValidationError(f"offset needs {scheme.n} components for {scheme.name}")
    return gamma


def _region(text: str | None, dim: int, default: str):
    region = region_from_string(text or default)
    if region.dim != dim:
        raise ValidationError(f"region has dimension {region.dim}, scheme needs {dim}")
    return region


def _default_region(dim: int) -> str:
    return "0:100" if dim == 1 else ",".join(["-15:15"] * dim)


# ------------------------------------------------------------- subcommands


class Job:
    def __init__(self, args):
        self.args = args
        self.outputs: dict[str, str] = {}
        self.summary: dict = {}

    def path(self, name: str) -> str:
        return os.path.join(self.args.out, f"{self.args.prefix}{name}")

    def write(self, name: str, text: str) -> None:
        p = self.path(name)
        write_atomic(p, text)
        self.outputs[name] = p


def cmd_gen(job: Job) -> None:
    a = job.args
    scheme = load_scheme(a)
    gamma = _check_gamma(scheme, a.gamma)
    region = _region(a.region, scheme.d, _default_region(scheme.d))
    p = generate(scheme, gamma, region)
    d, n = p.positions.shape[1], p.preimages.shape[1]
    header = [f"x{i}" for i in range(d)] + [f"n{i}" for i in range(n)]
    rows = (list(x) + list(m) for x, m in zip(p.positions, p.preimages))
    job.write("points.csv", csv_text(header, rows))
    job.write("points.svg", points_svg(p.positions))
    job.summary.update(points=len(p), singular=("singular-parameter" in p.flags), volume=region.volume)


def cmd_diffract(job: Job) -> None:
    a = job.args
    if not 0 < a.floor <= 1:
        raise ValidationError("floor must lie in (0, 1]")
    scheme = load_scheme(a)
    gamma = _check_gamma(scheme, a.gamma)
    s = model_set_spectrum(scheme, gamma, K=a.kmax, intensity_floor=a.floor)
    d = s.k.shape[1]
    header = [f"k{i}" for i in range(d)] + ["k_int_norm", "intensity"]
    job.write("spectrum.csv", csv_text(header, s.rows()))
    job.write("spectrum.svg", disc_plot_svg(s, a.floor))
    job.summary.update(peaks=len(s), central_intensity=s.central_intensity, density=scheme.density)


def _rule(name: str):
    if name in SYMBOLIC:
        return SYMBOLIC[name]
    return get_rule(name)


def cmd_inflate(job: Job) -> None:
    a = job.args
    rule = _rule(a.rule)
    if isinstance(rule, SymbolicSubstitution):
        word = a.seed_tile if a.seed_tile in rule.alphabet else rule.alphabet[0]
        vec = rule.counts(word)
        rows = [[0, *vec]]
        for k in range(1, max(a.depth, a.count_steps) + 1):
            vec = rule.matrix.dot(vec)
            rows.append([k, *vec])
        job.write("counts.csv", csv_text(["step", *rule.alphabet], rows))
        job.write("word.txt", rule.apply(word, min(a.depth, 25)) + "\n")
        job.summary.update(letters=int(sum(rows[a.depth][1:])))
        return
    t = seed_tiling(rule, a.seed_tile)
    labels = sorted(rule.labels)
    rows = [[0, *(t.counts()[x] for x in labels)]]
    # tile counts by substitution matrix beyond the explicit depth
    vec = np.array([t.counts()[x] for x in rule.labels], dtype=object)
    m = np.array(rule.matrix, dtype=object)
    for k in range(1, max(a.depth, a.count_steps) + 1):
        vec = m.dot(vec)
        cnt = dict(zip(rule.labels, vec))
        rows.append([k, *(int(cnt[x]) for x in labels)])
    t = substitute(rule, t, a.depth)
    job.write("counts.csv", csv_text(["step", *labels], rows))
    _write_tiles(job, t)
    job.summary.update(tiles=len(t), depth=a.depth)


def _write_tiles(job: Job, t) -> None:
    rank = t.module.rank
    header = ["label", "rotation", *(f"t{i}" for i in range(rank)), "denominator"]
    rows = ([r["label"], r["rotation"], *r["translation_numerators"], r["denominator"]] for r in t.records())
    job.write("tiles.csv", csv_text(header, rows))
    job.write("tiles.svg", tiling_svg(t))


def cmd_atlas(job: Job) -> None:
    a = job.args
    if a.rule:
        rule = _rule(a.rule)
        atlas = build_atlas_by_inflation(rule, a.radius, a.depth)
    else:
        scheme = load_scheme(a)
        region = _region(a.region, scheme.d, _default_region(scheme.d))
        atlas = extract_atlas(generate(scheme, _check_gamma(scheme, a.gamma), region), a.radius)
    doc = {"radius": a.radius, "size": len(atlas), "metadata": atlas.metadata, "patches": list(atlas.records())}
    job.write("atlas.json", json.dumps(doc, indent=1, default=str) + "\n")
    job.summary.update(size=len(atlas), stabilized=atlas.metadata.get("stabilized"))


def cmd_compare_li(job: Job) -> None:
    a = job.args
    scheme = load_scheme(a)
    region = _region(a.region, scheme.d, _default_region(scheme.d))
    pa = generate(scheme, _check_gamma(scheme, a.gamma_a), region)
    if a.periodic_word:
        if scheme.name != "fibonacci":
            raise ValidationError("periodic comparison is defined for the fibonacci scheme")
        lo, hi = region.bounds()
        reps = int(math.ceil((hi[0] - lo[0]) / 2)) + 2
        pb = word_chain(a.periodic_word * reps, FIBONACCI_LENGTHS).restricted(region)
    else:
        pb = generate(scheme, _check_gamma(scheme, a.gamma_b), region)
    only_a, only_b = li_difference(pa, pb, a.radius)
    job.summary.update(equivalent=(only_a == 0 and only_b == 0), only_in_a=only_a, only_in_b=only_b)
    job.write("compare.json", json.dumps(job.summary, indent=1) + "\n")


def cmd_derive(job: Job) -> None:
    a = job.args
    rule = DERIVATION_RULES.get(a.rule)
    if rule is None:
        raise ValidationError(f"unknown derivation rule {a.rule!r}; choose from {sorted(DERIVATION_RULES)}")
    source = substitute(get_rule("penrose-robinson"), seed_tiling(get_rule("penrose-robinson"), a.seed_tile), a.depth)
    if a.rule == "penrose-to-robinson":
        source = derive(DERIVATION_RULES["robinson-to-penrose"], source)
    out = derive(rule, source)
    _write_tiles(job, out)
    job.summary.update(source_tiles=len(source), derived_tiles=len(out))


def cmd_ltm(job: Job) -> None:
    a = job.args
    scheme = load_scheme(a)
    region = _region(a.region, scheme.d, _default_region(scheme.d))
    p = generate(scheme, _check_gamma(scheme, a.gamma), region)
    rows = []
    for r in sorted(a.radius):
        est = ltm_estimate(p, r)
        rows.append([r, est.rank, int(est.degenerate), " ".join("(" + " ".join(map(str, b)) + ")" for b in est.basis.tolist())])
    job.write("ltm.csv", csv_text(["radius", "rank", "degenerate", "basis"], rows))
    job.summary.update(ranks=[r[1] for r in rows])


def cmd_complexity(job: Job) -> None:
    a = job.args
    if a.rule not in SYMBOLIC:
        raise ValidationError(f"complexity needs a symbolic rule; choose from {sorted(SYMBOLIC)}")
    rows = []
    for n in range(1, a.nmax + 1):
        c = complexity(SYMBOLIC[a.rule], n, a.prefix_length)
        rows.append([n, c.count, math.log(c.count) / n, int(c.sufficient)])
    job.write("complexity.csv", csv_text(["n", "count", "log_count_over_n", "sufficient"], rows))
    job.summary.update(all_n_plus_one=all(r[1] == r[0] + 1 for r in rows))


def cmd_sample(job: Job) -> None:
    a = job.args
    if a.ensemble == "binary":
        if a.nu is None or not 0 <= a.nu <= 1:
            raise ValidationError("--nu in [0, 1] is required for the binary ensemble")
        w = sample_binary_chain(BinaryEnsemble(a.nu, a.length, a.seed))
        job.write("word.txt", w + "\n")
        job.summary.update(length=len(w), frequency_a=w.count("a") / max(len(w), 1))
        if a.block and len(w) >= a.block:
            job.summary["block_entropy"] = block_entropy(w, a.block)
        return
    L1, L2 = a.torus
    cfg = mc_sample(all_rhombus_config(L1, L2), a.steps, a.seed)
    rows = ([r["label"], r["orientation"], *r["cell"], r["triangle"], r["piece"]] for r in cfg.records())
    job.write("tiles.csv", csv_text(["label", "orientation", "i", "j", "triangle", "piece"], rows))
    job.write("tiles.svg", dart_rhombus_svg(cfg))
    job.summary.update(valid=is_valid(cfg), counts=dict(zip(("r0", "r1", "r2", "dart"), cfg.counts())))


def cmd_count(job: Job) -> None:
    a = job.args
    density = {}
    for item in a.density or []:
        key, _, val = item.partition("=")
        if key not in ("r0", "r1", "r2", "dart") or not val.isdigit():
            raise ValidationError(f"density constraint must look like r0=4, got {item!r}")
        density[key] = int(val)
    rows = []
    if density:
        for L1, L2 in a.torus:
            dist = count_distribution(L1, L2, a.budget)
            order = ("r0", "r1", "r2", "dart")
            c = sum(v for k, v in dist.items() if all(k[order.index(x)] == n for x, n in density.items()))
            rows.append([L1, L2, c, "", ""])
    else:
        for e in ladder_entropies(a.torus, a.budget):
            rows.append([e["L1"], e["L2"], e["count"], e["per_tile"], e["per_piece"]])
    job.write("counts.csv", csv_text(["L1", "L2", "count", "entropy_per_tile", "entropy_per_piece"], rows))
    job.summary.update(counts=[r[2] for r in rows])


def cmd_entropy_scan(job: Job) -> None:
    a = job.args
    s = entropy_scan(a.family, torus=a.torus, budget=a.budget)
    job.write("entropy_scan.csv", csv_text(["parameter", "entropy", "error"], zip(s.grid, s.entropy, s.errors)))
    job.summary.update(argmax=s.argmax, r2=s.r2, fit=[float(c) for c in s.fit], **{k: v for k, v in s.metadata.items() if k != "torus"})


COMMANDS = {
    "gen": cmd_gen,
    "diffract": cmd_diffract,
    "inflate": cmd_inflate,
    "atlas": cmd_atlas,
    "compare-li": cmd_compare_li,
    "derive": cmd_derive,
    "ltm": cmd_ltm,
    "complexity": cmd_complexity,
    "sample": cmd_sample,
    "count": cmd_count,
    "entropy-scan": cmd_entropy_scan,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="aperiodic", description="Aperiodic order toolkit")
    ap.add_argument("--version", action="version", version=__version__)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", default=".", help="output directory")
    common.add_argument("--prefix", default="", help="file name prefix")
    common.add_argument("--seed", type=_nonneg_int, default=0)
    scheme = argparse.ArgumentParser(add_help=False)
    g = scheme.add_mutually_exclusive_group()
    g.add_argument("--scheme", default="fibonacci", help=f"one of {', '.join(sorted(SCHEMES))}")
    g.add_argument("--descriptor", help="JSON scheme descriptor")
    scheme.add_argument("--region", help="a:b | a:b,c:d | ball:x,y,r")
    scheme.add_argument("--gamma", type=_gamma, help="embedding offset, comma separated rationals")

    sub = ap.add_subparsers(dest="command", required=True)
    sub.add_parser("gen", parents=[common, scheme], help="generate a model set")
    p = sub.add_parser("diffract", parents=[common, scheme], help="Bragg spectrum of a model set")
    p.add_argument("--kmax", type=_positive(), default=5.0)
    p.add_argument("--floor", type=float, default=1e-3, help="relative intensity cut (default 0.1%%)")

    rules = sorted(set(RULES) | set(SYMBOLIC))
    p = sub.add_parser("inflate", parents=[common], help="iterate a substitution")
    p.add_argument("--rule", required=True, choices=rules)
    p.add_argument("--depth", type=_nonneg_int, default=5)
    p.add_argument("--seed-tile", default="thick")
    p.add_argument("--count-steps", type=_nonneg_int, default=0, help="extend the count table to this step")

    p = sub.add_parser("atlas", parents=[common, scheme], help="r-patch atlas")
    p.add_argument("--rule", choices=rules)
    p.add_argument("--radius", type=_positive(), required=True)
    p.add_argument("--depth", type=_nonneg_int, default=7)

    p = sub.add_parser("compare-li", parents=[common, scheme], help="compare r-atlases of two members")
    p.add_argument("--gamma-a", type=_gamma)
    p.add_argument("--gamma-b", type=_gamma)
    p.add_argument("--periodic-word", help="compare against the periodic chain of this word")
    p.add_argument("--radius", type=_positive(), default=20.0)

    p = sub.add_parser("derive", parents=[common], help="apply a local derivation rule")
    p.add_argument("--rule", required=True, choices=sorted(DERIVATION_RULES))
    p.add_argument("--depth", type=_nonneg_int, default=6)
    p.add_argument("--seed-tile", default="thick", choices=("thick", "thin"))

    p = sub.add_parser("ltm", parents=[common, scheme], help="translation module estimates")
    p.add_argument("--radius", type=_positive(), nargs="+", default=[2.0, 5.0, 10.0])

    p = sub.add_parser("complexity", parents=[common], help="factor complexity table")
    p.add_argument("--rule", default="fibonacci")
    p.add_argument("--nmax", type=_positive(int), default=12)
    p.add_argument("--prefix-length", dest="prefix_length", type=_positive(int), default=20_000)

    p = sub.add_parser("sample", parents=[common], help="random tiling sample")
    p.add_argument("--ensemble", choices=("binary", "dart-rhombus"), default="binary")
    p.add_argument("--nu", type=float)
    p.add_argument("--length", type=_nonneg_int, default=1000)
    p.add_argument("--block", type=_positive(int))
    p.add_argument("--torus", type=_torus, default=(3, 3))
    p.add_argument("--steps", type=_nonneg_int, default=1000)

    p = sub.add_parser("count", parents=[common], help="exact dart-rhombus counts")
    p.add_argument("--torus", type=_torus, nargs="+", default=[(2, 2), (3, 3)])
    p.add_argument("--density", nargs="*", help="constraints such as r0=4 dart=6")
    p.add_argument("--budget", type=_positive(int), default=96, help="maximum pieces (six per cell)")

    p = sub.add_parser("entropy-scan", parents=[common], help="entropy versus density")
    p.add_argument("--family", choices=("binary", "dart-rhombus"), default="binary")
    p.add_argument("--torus", type=_torus, default=(4, 4))
    p.add_argument("--budget", type=_positive(int), default=96)
    return ap


def _versions() -> dict:
    out = {"aperiodic": __version__, "python": platform.python_version()}
    for lib in ("numpy", "scipy", "sympy", "mpmath"):
        try:
            out[lib] = metadata.version(lib)
        except metadata.PackageNotFoundError:
            out[lib] = None
    return out


def _jsonable(v):
    if isinstance(v, tuple):
        return [_jsonable(x) for x in v]
    if isinstance(v, list):
        return [_jsonable(x) for x in v]
    if isinstance(v, Fraction):
        return str(v)
    return v


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    job = Job(args)
    try:
        COMMANDS[args.command](job)
    except ValidationError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except Exception as e:  # noqa: BLE001 - reported as a computation failure
        print(f"computation failed: {type(e).__name__}: {e}", file=sys.stderr)
        return 1
    params = {k: _jsonable(v) for k, v in sorted(vars(args).items())}
    manifest = {
        "command": args.command,
        "parameters": params,
        "seed": args.seed,
        "versions": _versions(),
        "outputs": sorted(job.outputs),
        "summary": job.summary,
    }
    write_atomic(job.path("manifest.json"), json.dumps(manifest, indent=1, sort_keys=True, default=str) + "\n")
    print(json.dumps(job.summary, default=str))
    return 0


if __name__ == "__main__":
    sys.exit(main())
