"""Experiment harness: identity verification and convergence studies.

Subcommands:

verify       -- run the full identity suite and write a JSON report.
convergence  -- tabulate the distance of smoothed Toeplitz approximants
                to their targets across the weight grid.
criterion    -- tabulate sup bounds of the smoothed transforms (the
                Toeplitz membership signal) for symbols and probes.
wiener       -- moment-system recovery of radial symbols from level
                sequences (the density-by-recovery experiment).
tabulate     -- dump level and profile tables for plotting.

All commands take one JSON config; every default is embedded and echoed
into the report, so a run is reproducible from (config, seed).  Exit
codes: 0 all checks pass, 1 check failures, 2 invalid configuration.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import click
import numpy as np

from . import __version__, radialcalc
from .convolution import (SymbolFunction, fun_conv_fun, fun_conv_op,
                          op_conv_op, radialize_fun, symbol_family)
from .geometry import (GroupElement, ball_point, boost, cocycle,
                       invariant_density, involution_map, mobius_act,
                       random_group_element, unitary_embed)
from .operators import (OperatorMatrix, RadialOperator, alpha_berezin,
                        alpha_berezin_profile, alpha_berezin_radial_toeplitz,
                        berezin, op_norm, phi, phi_alpha, pi_matrix, radialize,
                        radial_levels, schatten_norm, toeplitz, toeplitz_radial,
                        trace, translate_operator, translate_vector,
                        load_levels_csv, load_operator_csv)
from .space import (BasisSpec, CoeffVector, KernelParams, basis_matrix,
                    c_alpha, default_grid, gauss_legendre_01, integrate,
                    integrate_invariant, kernel, kernel_tail,
                    normalized_kernel, project)
from . import translation as _tr

FLOAT_FMT = "%.17g"

DEFAULT_SYMBOLS = (
    {"family": "constant"},
    {"family": "power", "p": 1},
    {"family": "power", "p": 2},
    {"family": "power", "p": 3},
    {"family": "step", "r0": 0.5},
    {"family": "step", "r0": 0.7},
    {"family": "oscillatory", "omega": 3.0},
    {"family": "oscillatory", "omega": 7.0},
    {"family": "weight", "beta": 1.0},
    {"family": "weight", "beta": 2.0},
)

DEFAULT_CONFIG = {
    "n": 1,
    "D": 40,
    "Nr": None,
    "Ntheta": None,
    "Ns": None,
    "r_max": 0.8,
    "conv_r_max": 1.0,
    "alpha_grid": list(range(13)),
    "criterion_alphas": list(range(9)),
    "norm": "op",
    "symbols": list(DEFAULT_SYMBOLS),
    "wiener": {"D": 8, "targets": ["phi", "ones"]},
    "extra_alphas": [-0.5, 0.5, 1.5],
    "operator_files": [],
    "seed": 20240801,
    "out_dir": "out",
}


class ConfigError(ValueError):
    pass


def load_config(path: str | None, seed: int | None = None,
                out_dir: str | None = None) -> dict:
    cfg = json.loads(json.dumps(DEFAULT_CONFIG))  # deep copy
    if path is not None:
        try:
            with open(path, "r", encoding="utf-8") as fh:
                user = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config: {exc}") from exc
        if not isinstance(user, dict):
            raise ConfigError("config must be a JSON object")
        unknown = set(user) - set(cfg)
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        cfg.update(user)
    if seed is not None:
        cfg["seed"] = int(seed)
    if out_dir is not None:
        cfg["out_dir"] = out_dir
    _validate(cfg)
    return cfg


def _validate(cfg: dict) -> None:
    if cfg["n"] not in (1, 2):
        raise ConfigError("n must be 1 or 2")
    if not (0 <= int(cfg["D"]) <= 80):
        raise ConfigError("D out of range")
    alphas = list(cfg["alpha_grid"]) + list(cfg["criterion_alphas"]) + list(cfg["extra_alphas"])
    if any(a <= -1 for a in alphas):
        raise ConfigError("all weight parameters must exceed -1")
    int_alphas = [a for a in cfg["alpha_grid"] if float(a).is_integer()]
    if int_alphas and max(int_alphas) > cfg["D"]:
        raise ConfigError("D must be at least the largest integer weight in alpha_grid")
    if not (0 < cfg["r_max"] < 1):
        raise ConfigError("r_max must lie in (0, 1)")
    if not (0 < cfg["conv_r_max"] <= 1):
        raise ConfigError("conv_r_max must lie in (0, 1]")
    if cfg["norm"] not in ("op", "schatten-1", "schatten-2"):
        raise ConfigError("norm must be op | schatten-1 | schatten-2")
    for s in cfg["symbols"]:
        if "family" not in s:
            raise ConfigError("each symbol needs a family")


@dataclass
class Record:
    """One verification record: what was checked, against what, how close."""

    name: str
    law: str
    value: float
    bound: float
    tolerance: float
    passed: bool
    diagnostics: dict = field(default_factory=dict)


@dataclass
class RunReport:
    version: str
    config_echo: dict
    records: list
    summary: dict

    def write(self, path: Path) -> None:
        payload = {
            "version": self.version,
            "config_echo": self.config_echo,
            "records": [asdict(r) for r in self.records],
            "summary": self.summary,
        }
        path.write_text(json.dumps(payload, indent=2, sort_keys=False) + "\n",
                        encoding="utf-8")


def _summarize(records: list[Record]) -> dict:
    npass = sum(1 for r in records if r.passed)
    return {"pass": npass, "fail": len(records) - npass}


def _write_csv(path: Path, header: list[str], rows: list[tuple]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            cells = [FLOAT_FMT % v if isinstance(v, float) else str(v) for v in row]
            fh.write(",".join(cells) + "\n")


# ---------------------------------------------------------------------------
# shared experiment context
# ---------------------------------------------------------------------------

class Context:
    def __init__(self, cfg: dict):
        self.cfg = cfg
        self.n = int(cfg["n"])
        self.D = int(cfg["D"])
        self.basis = BasisSpec(self.n, self.D)
        self.rng = np.random.default_rng(int(cfg["seed"]))
        self.r_max = float(cfg["r_max"])
        self._grid = None
        self._toeplitz_cache: dict = {}
        self.symbols = [symbol_family(n=self.n, **dict(s)) for s in
                        [dict(item) for item in cfg["symbols"]]]

    @property
    def grid(self):
        if self._grid is None:
            breaks = tuple(sorted({b for s in self.symbols for b in s.t_breaks}))
            self._grid = default_grid(self.n, self.D, self.cfg["Nr"],
                                      self.cfg["Ntheta"], self.cfg["Ns"], breaks=breaks)
        return self._grid

    def toeplitz_of(self, sym: SymbolFunction) -> OperatorMatrix:
        """Full-grid Toeplitz matrix, cached per symbol name."""
        if sym.name not in self._toeplitz_cache:
            self._toeplitz_cache[sym.name] = toeplitz(sym.fn, self.grid, self.basis)
        return self._toeplitz_cache[sym.name]

    def sample_points(self, count: int, radius: float) -> np.ndarray:
        """Volume-uniform random points with |z| <= radius."""
        pts = np.empty((count, self.n), dtype=complex)
        for i in range(count):
            direction = self.rng.normal(size=self.n) + 1j * self.rng.normal(size=self.n)
            direction /= np.linalg.norm(direction)
            pts[i] = radius * self.rng.uniform(0.0, 1.0) ** (1.0 / (2 * self.n)) * direction
        return pts

    def norm_of(self, mat) -> float:
        sel = self.cfg["norm"]
        if sel == "op":
            return op_norm(mat)
        return schatten_norm(mat, float(sel.split("-")[1]))


def _mixed_err(lhs, rhs) -> float:
    lhs, rhs = complex(lhs), complex(rhs)
    return abs(lhs - rhs) / max(1.0, abs(lhs), abs(rhs))


# ---------------------------------------------------------------------------
# verify: geometry block
# ---------------------------------------------------------------------------

def _checks_geometry(ctx: Context) -> list[Record]:
    n, rng = ctx.n, ctx.rng
    recs: list[Record] = []

    def Kval(alpha, w, z):
        return complex(kernel(KernelParams(alpha), z, w[None, :], n=n)[0])

    worst = {i: 0.0 for i in range(1, 6)}
    trials = 200
    for _ in range(trials):
        alpha = float(rng.integers(0, 6))
        g = random_group_element(rng, n, radius=0.9)
        z = ctx.sample_points(1, 0.9)[0]
        w = ctx.sample_points(1, 0.9)[0]
        gi = g.inverse()
        gz, gw, g0 = mobius_act(g, z), mobius_act(g, w), mobius_act(g, np.zeros(n))
        jz = cocycle(g, z, alpha).value
        jw = cocycle(g, w, alpha).value
        j0 = cocycle(g, np.zeros(n), alpha).value
        # (1) kernel invariance
        worst[1] = max(worst[1], _mixed_err(jw * Kval(alpha, gw, gz) * np.conj(jz),
                                            Kval(alpha, w, z)))
        # (2) modulus at the origin
        worst[2] = max(worst[2], _mixed_err(abs(j0) ** 2,
                                            (1 - np.sum(np.abs(g0) ** 2)) ** (n + 1 + alpha)))
        # (3) inverse pair
        worst[3] = max(worst[3], _mixed_err(cocycle(gi, gz, alpha).value, 1.0 / jz))
        worst[3] = max(worst[3], _mixed_err(np.conj(cocycle(gi, np.zeros(n), alpha).value), j0))
        # (4) three-element relation
        h = random_group_element(rng, n, radius=0.9)
        h0inv = mobius_act(h.inverse(), np.zeros(n))
        lhs4 = np.conj(cocycle(gi, h0inv, alpha).value)
        rhs4 = (cocycle(h, g0, alpha).value * j0 / cocycle(h, np.zeros(n), alpha).value)
        worst[4] = max(worst[4], _mixed_err(lhs4, rhs4))
        # (5) kernel link
        worst[5] = max(worst[5], _mixed_err(cocycle(gi, w, alpha).value,
                                            np.conj(j0) * Kval(alpha, w, g0)))
    laws = {
        1: "j(g,w) K(g.w, g.z) conj(j(g,z)) = K(w,z)",
        2: "|j(g,0)|^2 = (1-|g.0|^2)^(n+1+alpha)",
        3: "j(g^-1, g.z) = 1/j(g,z); conj(j(g^-1,0)) = j(g,0)",
        4: "conj(j(g^-1, h^-1.0)) = j(h,g.0) j(g,0) / j(h,0)",
        5: "j(g^-1, w) = conj(j(g,0)) K(w, g.0)",
    }
    for i in range(1, 6):
        recs.append(Record(f"geometry.cocycle_{i}", laws[i], worst[i], 0.0, 1e-10,
                           worst[i] <= 1e-10, {"trials": trials, "error_metric": "relative above 1"}))

    err = 0.0
    for _ in range(100):
        z = ctx.sample_points(1, 0.9)[0]
        w = ctx.sample_points(1, 0.9)[0]
        err = max(err, float(np.max(np.abs(involution_map(z, involution_map(z, w)) - w))))
        err = max(err, float(np.max(np.abs(involution_map(z, np.zeros(n)) - z))))
        err = max(err, float(np.max(np.abs(involution_map(z, z)))))
    recs.append(Record("geometry.involution", "tau_z(tau_z(w)) = w, tau_z(0) = z, tau_z(z) = 0",
                       err, 0.0, 1e-12, err <= 1e-12, {"pairs": 100}))

    err = 0.0
    for _ in range(50):
        g = random_group_element(rng, n, 0.8)
        h = random_group_element(rng, n, 0.8)
        z = ctx.sample_points(1, 0.9)[0]
        err = max(err, float(np.max(np.abs(mobius_act(g, mobius_act(h, z))
                                           - mobius_act(g @ h, z)))))
    recs.append(Record("geometry.group_action", "g.(h.z) = (g h).z", err, 0.0, 1e-12,
                       err <= 1e-12, {"trials": 50}))

    z0 = ctx.sample_points(1, 0.5)[0]
    b = boost(z0)
    err = float(np.max(np.abs(mobius_act(b, np.zeros(n)) - z0)))
    recs.append(Record("geometry.boost", "boost(z).0 = z, signature and det preserved",
                       err, 0.0, 1e-12, err <= 1e-12, {}))

    # invariance of the measure under a quadrature change of variables
    g = boost(ctx.sample_points(1, 0.25)[0])
    phi2 = symbol_family("phi_alpha", n=n, alpha=2.0)
    gm = g.inverse().mat
    pts = ctx.grid.points
    den = pts @ gm[n, :n] + gm[n, n]
    moved_pts = (pts @ gm[:n, :n].T + gm[:n, n][None, :]) / den[:, None]
    lhs = integrate_invariant(phi2.fn(moved_pts), ctx.grid)
    rhs = integrate_invariant(phi2.fn(pts), ctx.grid)
    err = abs(lhs - rhs)
    recs.append(Record("geometry.invariant_measure", "int f(g^-1.z) dlambda = int f dlambda",
                       err, 0.0, 1e-8, err <= 1e-8,
                       {"lhs": float(lhs.real), "rhs": float(rhs.real)}))
    return recs


# ---------------------------------------------------------------------------
# verify: space block
# ---------------------------------------------------------------------------

def _checks_space(ctx: Context) -> list[Record]:
    recs: list[Record] = []
    basis, grid = ctx.basis, ctx.grid
    gram = toeplitz(lambda pts: np.ones(pts.shape[0], dtype=complex), grid, basis).mat
    err = float(np.max(np.abs(gram - np.eye(basis.dim))))
    recs.append(Record("space.orthonormality", "quadrature Gram matrix of the basis = identity",
                       err, 0.0, 1e-12, err <= 1e-12, {"dim": basis.dim}))

    err = float(abs(np.sum(grid.weights) - 1.0))
    recs.append(Record("space.unit_mass", "int 1 dv = 1", err, 0.0, 1e-14, err <= 1e-14, {}))

    # reproducing property for random polynomials of model degree; the kernel
    # is not a polynomial, so the pairing grid needs angular resolution far
    # beyond the model grid to avoid aliasing its slowly decaying series
    from .space import ball2_grid, disc_grid
    if ctx.n == 1:
        rep_grid, rep_radius = disc_grid(basis.D + 8, basis.D + 340), 0.9
    else:
        rep_grid, rep_radius = ball2_grid(basis.D + 8, basis.D + 8, basis.D + 64), 0.62
    worst = 0.0
    for _ in range(10):
        coef = ctx.rng.normal(size=basis.dim) + 1j * ctx.rng.normal(size=basis.dim)
        z = ctx.sample_points(1, rep_radius)[0]
        fz = complex(basis_matrix(basis, z[None, :])[0] @ coef)
        fproj = project(lambda pts: basis_matrix(basis, pts) @ coef, rep_grid, basis)
        Kz_coef = basis_matrix(basis, z[None, :])[0].conj()  # K_z truncated = sum conj(e_m(z)) e_m
        ip_poly = complex(Kz_coef.conj() @ fproj.coeffs)
        # direct sampled pairing <f, K_z>
        Kz = kernel(KernelParams(0.0), z, rep_grid.points, n=ctx.n)
        fvals = np.zeros(rep_grid.size, dtype=complex)
        step = max(1, 2_000_000 // basis.dim)
        for lo in range(0, rep_grid.size, step):
            hi = min(rep_grid.size, lo + step)
            fvals[lo:hi] = basis_matrix(basis, rep_grid.points[lo:hi]) @ coef
        ip = complex(np.sum(rep_grid.weights * fvals * np.conj(Kz)))
        worst = max(worst, abs(ip - fz) / max(1.0, abs(fz)),
                    abs(ip_poly - fz) / max(1.0, abs(fz)))
    recs.append(Record("space.reproducing", "<f, K_z> = f(z) for model polynomials",
                       worst, 0.0, 1e-10, worst <= 1e-10,
                       {"trials": 10, "radius": rep_radius}))

    worst = 0.0
    for alpha in range(0, 7):
        gamma_form = c_alpha(ctx.n, float(alpha))
        fact_form = math.factorial(ctx.n + alpha) / (math.factorial(ctx.n)
                                                     * math.factorial(alpha))
        worst = max(worst, abs(gamma_form - fact_form) / fact_form)
    recs.append(Record("space.weight_constant", "Gamma form of C_alpha equals factorial form",
                       worst, 0.0, 1e-13, worst <= 1e-13, {}))

    # monomial moments against the closed form
    worst = 0.0
    cs = basis.norm_constants()
    for i, m in enumerate(basis.indices):
        moment = float(np.sum(grid.weights * np.abs(E[:, i] / cs[i]) ** 2))
        worst = max(worst, abs(moment - 1.0 / cs[i] ** 2) / (1.0 / cs[i] ** 2))
    recs.append(Record("space.monomial_moments", "int |z^m|^2 dv = n! m! / (n+|m|)!",
                       worst, 0.0, 1e-12, worst <= 1e-12, {}))

    worst = 0.0
    for alpha in (0.0, 1.0, 2.0, 3.0):
        sym = symbol_family("phi_alpha", n=ctx.n, alpha=alpha)
        total = integrate_invariant(sym.fn(grid.points), grid)
        worst = max(worst, abs(total - 1.0))
    recs.append(Record("space.approx_identity_mass", "int phi_alpha dlambda = 1",
                       worst, 0.0, 1e-10, worst <= 1e-10, {"alphas": [0, 1, 2, 3]}))
    return recs


# ---------------------------------------------------------------------------
# verify: operators block
# ---------------------------------------------------------------------------

def _checks_operators(ctx: Context) -> list[Record]:
    recs: list[Record] = []
    basis, grid, rng = ctx.basis, ctx.grid, ctx.rng
    n, D = ctx.n, ctx.D

    T1 = toeplitz(lambda pts: np.ones(pts.shape[0], dtype=complex), grid, basis)
    err = float(np.max(np.abs(T1.mat - np.eye(basis.dim))))
    recs.append(Record("operators.toeplitz_unit", "T_1 = Id", err, 0.0, 1e-12,
                       err <= 1e-12, {}))

    a_fn = lambda pts: np.atleast_2d(pts)[:, 0] + 0.3  # noqa: E731
    Ta = toeplitz(a_fn, grid, basis)
    Tabar = toeplitz(lambda pts: np.conj(a_fn(pts)), grid, basis)
    err = float(np.max(np.abs(Tabar.mat - Ta.mat.conj().T)))
    recs.append(Record("operators.toeplitz_adjoint", "T_conj(a) = T_a^*", err, 0.0, 1e-12,
                       err <= 1e-12, {}))

    sym = symbol_family("power", n=n, p=1)
    Tr2 = ctx.toeplitz_of(sym)
    levels = radialcalc.moment_levels(sym.profile, n, D)
    err = float(np.max(np.abs(np.diag(Tr2.mat) - levels.values[basis.degrees])))
    off = float(np.max(np.abs(Tr2.mat - np.diag(np.diag(Tr2.mat)))))
    recs.append(Record("operators.radial_toeplitz_oracle",
                       "full-grid Toeplitz diagonal = 1-D moment levels",
                       max(err, off), 0.0, 1e-10, max(err, off) <= 1e-10,
                       {"diag_err": err, "offdiag": off}))

    worst = 0.0
    n_contraction = 20 if n == 1 else 6
    for _ in range(n_contraction):
        coef = rng.normal(size=6)
        fn = lambda pts, c=coef: sum(c[j] * np.cos(j * np.sum(np.abs(np.atleast_2d(pts)) ** 2, axis=-1))
                                     for j in range(6)).astype(complex)
        vals = fn(grid.points)
        sup = float(np.max(np.abs(vals)))
        excess = op_norm(toeplitz(vals, grid, basis)) - sup
        worst = max(worst, excess)
    recs.append(Record("operators.toeplitz_contraction", "|T_a| <= sup|a|", worst, 0.0, 1e-6,
                       worst <= 1e-6, {"symbols": n_contraction}))

    Phi = phi(basis)
    e0 = CoeffVector(basis, np.eye(basis.dim, dtype=complex)[:, 0])
    applied = Phi.to_matrix().apply(e0)
    err = float(np.linalg.norm(applied.coeffs - e0.coeffs))
    err = max(err, abs(trace(Phi.to_matrix()) - 1.0))
    z = ctx.sample_points(1, 0.49)[0]
    t = float(np.sum(np.abs(z) ** 2))
    err = max(err, abs(berezin(Phi.to_matrix(), z) - (1 - t) ** (n + 1)))
    recs.append(Record("operators.rank_one_projection",
                       "Phi fixes constants, Tr Phi = 1, B(Phi) = (1-|z|^2)^(n+1)",
                       err, 0.0, 1e-12, err <= 1e-12, {}))

    worst_int = 0.0
    for alpha in range(0, min(D, 8) + 1):
        R = phi_alpha(float(alpha), basis)
        worst_int = max(worst_int, abs(radialcalc.weighted_trace(R.level_sequence()) - 1.0))
    rec_diag = {}
    worst_frac = 0.0
    for alpha in ctx.cfg["extra_alphas"]:
        R = phi_alpha(float(alpha), basis)
        tail = radialcalc.phi_alpha_level_tail(float(alpha), n, D)
        gap = abs(radialcalc.weighted_trace(R.level_sequence()) - 1.0)
        rec_diag[f"alpha={alpha}"] = {"trace_gap": gap, "tail": tail}
        worst_frac = max(worst_frac, gap - tail)
    recs.append(Record("operators.smoothing_trace_one",
                       "Tr Phi_alpha = 1 (exact integer; within level tail otherwise)",
                       max(worst_int, worst_frac), 0.0, 1e-12,
                       max(worst_int, worst_frac) <= 1e-12, rec_diag))

    if n == 1:
        R1 = phi_alpha(1.0, basis)
        tn = schatten_norm(R1.to_matrix(), 1.0)
        err = abs(tn - 3.0)
        err = max(err, abs(radialcalc.phi_alpha_trace_norm(1.0, 1) - 3.0))
        recs.append(Record("operators.smoothing_trace_norm", "|Phi_1|_1 = 3 on the disc",
                           err, 0.0, 1e-12, err <= 1e-12, {}))

    lev = rng.normal(size=D + 1)
    R = RadialOperator(basis, lev)
    worst = 0.0
    for rr in np.linspace(0.05, 0.85, 9):
        closed = radialcalc.berezin_radial(R.level_sequence(), rr)
        worst = max(worst, abs(berezin(R.to_matrix(), _axis_point(n, rr)) - closed))
    recs.append(Record("operators.berezin_dual_oracle",
                       "matrix Berezin of radial data = level power series",
                       worst, 0.0, 1e-9, worst <= 1e-9, {}))

    # translations: unitarity/involution within reported tails
    z = ctx.sample_points(1, 0.6)[0]
    U = pi_matrix(basis, z).mat
    tails = _tr.column_tails(U)
    herm = float(np.max(np.abs(U - U.conj().T)))
    sq_dev = float(np.max(np.abs(U @ U - np.eye(basis.dim))))
    bound = float(np.sum(tails ** 2))
    recs.append(Record("operators.translation_involution",
                       "pi(z)^2 = Id within the reported truncation tails",
                       sq_dev, bound, 1e-10, sq_dev <= bound + 1e-10,
                       {"hermiticity": herm, "max_tail": float(np.max(tails))}))

    f = CoeffVector(basis, rng.normal(size=basis.dim) + 1j * rng.normal(size=basis.dim))
    moved, lost = translate_vector(f, z)
    norm_gap = abs(moved.norm() ** 2 + lost ** 2 - f.norm() ** 2)
    back, lost2 = translate_vector(moved, z)
    inv_gap = float(np.linalg.norm(back.coeffs - f.coeffs))
    recs.append(Record("operators.translation_unitarity",
                       "|pi(z) f|^2 + tail^2 = |f|^2 and pi(z)pi(z)f = f within tails",
                       inv_gap, lost + lost2, 1e-10,
                       inv_gap <= (lost + lost2) * max(1.0, f.norm()) + 1e-10,
                       {"parseval_gap": norm_gap, "tail": lost}))

    # Berezin of a translated radial operator is the shifted Berezin
    Rsmall = RadialOperator(basis, np.exp(-np.arange(D + 1.0)))
    zshift = ctx.sample_points(1, 0.2)[0]
    wpt = ctx.sample_points(1, 0.2)[0]
    moved_op = translate_operator(Rsmall.to_matrix(), zshift)
    lhs = berezin(moved_op, wpt)
    tau = involution_map(zshift, wpt)
    rhs = radialcalc.berezin_radial(Rsmall.level_sequence(), float(np.linalg.norm(tau)))
    err = abs(lhs - rhs)
    recs.append(Record("operators.translated_berezin",
                       "B(pi(z) S pi(z))(w) = B(S)(tau_z w) for radial S",
                       err, 0.0, 1e-8, err <= 1e-8, {}))

    # translated rank-one applied to a vector
    ztr = ctx.sample_points(1, 0.5)[0]
    t = float(np.sum(np.abs(ztr) ** 2))
    moved_phi = translate_operator(phi(basis).to_matrix(), ztr)
    fvec = CoeffVector(basis, rng.normal(size=basis.dim) + 1j * rng.normal(size=basis.dim))
    got = moved_phi.apply(fvec)
    fz = complex(basis_matrix(basis, ztr[None, :])[0] @ fvec.coeffs)
    kz_coeffs = normalized_kernel(basis, ztr).coeffs / (1 - t) ** (0.5 * (n + 1))
    want = (1 - t) ** (n + 1) * fz * kz_coeffs
    err = float(np.linalg.norm(got.coeffs - want))
    tailb = float(np.max(_tr.column_tails(pi_matrix(basis, ztr).mat)))
    recs.append(Record("operators.translated_projection",
                       "pi(z) Phi pi(z) f = (1-|z|^2)^(n+1) f(z) K_z within tails",
                       err, tailb, 1e-8, err <= max(1e-8, 10 * tailb * fvec.norm()),
                       {"tail": tailb}))

    S = rng.normal(size=(basis.dim, basis.dim)) + 1j * rng.normal(size=(basis.dim, basis.dim))
    Rad = radialize(S, basis)
    err = float(np.max(np.abs(radialize(Rad).mat - Rad.mat)))
    contraction = op_norm(Rad) - op_norm(S)
    rank_one = np.zeros((basis.dim, basis.dim), dtype=complex)
    rank_one[0, 1] = 1.0
    zeroed = float(np.max(np.abs(radialize(rank_one, basis).mat)))
    ok = err == 0.0 and contraction <= 1e-12 and zeroed <= 1e-15
    recs.append(Record("operators.radialization",
                       "rotation average is idempotent, norm-contractive, kills shifts",
                       max(err, zeroed, max(contraction, 0.0)), 0.0, 1e-12, ok,
                       {"idempotent": err, "contraction_excess": float(contraction)}))

    u = rng.normal(size=basis.dim) + 1j * rng.normal(size=basis.dim)
    v = rng.normal(size=basis.dim) + 1j * rng.normal(size=basis.dim)
    Ruv = np.outer(u, v.conj())
    target = float(np.linalg.norm(u) * np.linalg.norm(v))
    worst = max(abs(schatten_norm(Ruv, p) - target) for p in (1.0, 2.0, 3.0, np.inf))
    recs.append(Record("operators.rank_one_norms", "|u (x) conj(v)|_p = |u| |v| for all p",
                       worst, 0.0, 1e-10, worst <= 1e-10, {}))

    wz = ctx.sample_points(1, 0.5)[0]
    Smat = OperatorMatrix(basis, S)
    worst = abs(alpha_berezin(Smat, wz, 0.0) - berezin(Smat, wz))
    recs.append(Record("operators.alpha_zero_reduction", "weight-0 transform is the Berezin transform",
                       worst, 0.0, 1e-12, worst <= 1e-12, {}))

    worst = 0.0
    diagn = {}
    ident = OperatorMatrix(basis, np.eye(basis.dim, dtype=complex))
    tcol = float(np.max(_tr.column_tails(_tr.pi_matrix(basis, wz))))
    for alpha in (0.0, 1.0, 3.0):
        val = alpha_berezin(ident, wz, alpha)
        level_tail = radialcalc.phi_alpha_level_tail(alpha, n, D)
        lam_abs = np.sum(np.abs(radialcalc.phi_alpha_levels(alpha, n, D).values)
                         * radialcalc.level_multiplicities(n, D))
        slack = level_tail + float(lam_abs) * tcol ** 2
        gap = abs(val - 1.0)
        diagn[f"alpha={alpha}"] = {"gap": gap, "translation_tail": tcol, "slack": slack}
        worst = max(worst, gap - slack)
    recs.append(Record("operators.alpha_berezin_identity",
                       "smoothed transform of Id is 1 within truncation remainders",
                       worst, 0.0, 1e-9, worst <= 1e-9, diagn))
    return recs


# ---------------------------------------------------------------------------
# verify: convolution block
# ---------------------------------------------------------------------------

def _checks_convolution(ctx: Context) -> list[Record]:
    recs: list[Record] = []
    basis, grid, rng = ctx.basis, ctx.grid, ctx.rng
    n, D = ctx.n, ctx.D
    Phi = phi(basis)
    # function-side convolutions integrate non-polynomial integrands, so use
    # a dedicated grid whose resolution does not track the model degree
    from .space import ball2_grid, disc_grid
    conv_grid = disc_grid(72, 160) if n == 1 else ball2_grid(20, 20, 40)

    one = symbol_family("constant", n=n)
    conv, diag = fun_conv_op(one, Phi)
    err = float(np.max(np.abs(conv.to_matrix().mat - np.eye(basis.dim))))
    recs.append(Record("convolution.unit_normalization",
                       "1 * Phi = Id (fixes the invariant-measure constant)",
                       err, 0.0, 1e-10, err <= 1e-10,
                       {"domain_remainder": diag.domain_remainder}))

    worst = 0.0
    per = {}
    for sym in ctx.symbols:
        T_direct = ctx.toeplitz_of(sym)
        conv, diag = fun_conv_op(sym, Phi, grid=grid)
        dist = op_norm(T_direct.mat - (conv.to_matrix().mat if isinstance(conv, RadialOperator)
                                       else conv.mat))
        per[sym.name] = {"distance": dist, "domain_remainder": diag.domain_remainder}
        worst = max(worst, dist - diag.domain_remainder)
    recs.append(Record("convolution.toeplitz_identity", "T_a = a * Phi for the symbol families",
                       worst, 0.0, 1e-6, worst <= 1e-6, per))

    worst = 0.0
    for rr in np.linspace(0.05, 0.7, 8):
        zpt = np.zeros(n); zpt[0] = rr
        val = op_conv_op(Phi.to_matrix(), Phi, zpt)
        worst = max(worst, abs(val - (1 - rr ** 2) ** (n + 1)))
    recs.append(Record("convolution.projection_pair", "Phi * Phi = (1-|z|^2)^(n+1)",
                       worst, 0.0, 1e-8, worst <= 1e-8, {}))

    S = rng.normal(size=(basis.dim, basis.dim)) + 1j * rng.normal(size=(basis.dim, basis.dim))
    S = OperatorMatrix(basis, S / op_norm(S))
    worst = 0.0
    for zpt in ctx.sample_points(6, 0.49):
        worst = max(worst, abs(op_conv_op(S, Phi, zpt) - berezin(S, zpt)))
    recs.append(Record("convolution.berezin_identity", "S * Phi = B(S)", worst, 0.0, 1e-10,
                       worst <= 1e-10, {}))

    worst = 0.0
    for alpha in range(0, 7):
        R = phi_alpha(float(alpha), basis)
        Ca = c_alpha(n, float(alpha))
        for rr in np.linspace(0.1, 0.7, 5):
            zpt = np.zeros(n); zpt[0] = rr
            val = op_conv_op(R.to_matrix(), Phi, zpt)
            worst = max(worst, abs(val - Ca * (1 - rr ** 2) ** (n + 1 + alpha)))
    recs.append(Record("convolution.smoothing_pair", "Phi_alpha * Phi = phi_alpha",
                       worst, 0.0, 1e-7, worst <= 1e-7, {"alphas": "0..6"}))

    # B~_alpha(T_a) = B_alpha(a) = a conv phi_alpha across three routes: the
    # untruncated operator transform, the group convolution, and the
    # weighted-kernel integral; the compressed-model transform is compared
    # within its own truncation slack
    sym = ctx.symbols[1] if len(ctx.symbols) > 1 else symbol_family("power", n=n, p=1)
    Ta = toeplitz(sym.fn, grid, basis)
    worst = 0.0
    worst_model = 0.0
    lamsum = {}
    for alpha in (1.0, 2.0):
        phia = symbol_family("phi_alpha", n=n, alpha=alpha)
        lam = radialcalc.phi_alpha_levels(alpha, n, basis.D).values
        for rr in (0.2, 0.5, 0.7):
            zpt = _axis_point(n, rr)
            exact_op, _ = alpha_berezin_radial_toeplitz(sym.profile, alpha,
                                                        np.array([rr ** 2]), n=n,
                                                        breaks=sym.t_breaks)
            function_side = fun_conv_fun(sym, phia, zpt, conv_grid)
            direct = radialcalc.balpha_radial_symbol(sym.profile, alpha, rr, n,
                                                     breaks=sym.t_breaks)
            worst = max(worst, abs(exact_op[0] - function_side), abs(function_side - direct))
            # compressed model transform against its truncation slack
            tails = _tr.column_tails(_tr.pi_matrix(basis, zpt))
            slack = float(sym.sup_norm) * float(np.sum(np.abs(lam[basis.degrees]) * tails ** 2))
            model_val = alpha_berezin(Ta, zpt, alpha)
            worst_model = max(worst_model, abs(model_val - direct) - 2 * slack)
            lamsum[f"alpha={alpha},r={rr}"] = slack
    recs.append(Record("convolution.symbol_transform_commutes",
                       "smoothed transform of T_a = weighted transform of a (three routes)",
                       worst, 0.0, 1e-8, worst <= 1e-8, {"symbol": sym.name}))
    recs.append(Record("convolution.symbol_transform_model",
                       "compressed-model transform agrees within its truncation slack",
                       worst_model, 0.0, 1e-8, worst_model <= 1e-8, lamsum))

    # commuting smoothing transforms across two weights
    Srad = RadialOperator(basis, rng.normal(size=D + 1) * np.exp(-0.2 * np.arange(D + 1.0)))
    alpha, beta = 1.0, 2.0
    f_beta = _radial_symbol_from_profile(
        "Bbeta(S)", lambda r: alpha_berezin_profile(Srad, beta, np.asarray(r) ** 2)[0].astype(complex))
    f_alpha = _radial_symbol_from_profile(
        "Balpha(S)", lambda r: alpha_berezin_profile(Srad, alpha, np.asarray(r) ** 2)[0].astype(complex))
    phia = symbol_family("phi_alpha", n=n, alpha=alpha)
    phib = symbol_family("phi_alpha", n=n, alpha=beta)
    worst = 0.0
    for rr in (0.15, 0.4, 0.65):
        zpt = _axis_point(n, rr)
        lhs = fun_conv_fun(f_beta, phia, zpt, conv_grid)
        rhs = fun_conv_fun(f_alpha, phib, zpt, conv_grid)
        worst = max(worst, abs(lhs - rhs))
    recs.append(Record("convolution.commuting_transforms",
                       "B_alpha(B~_beta(S)) = B_beta(B~_alpha(S))", worst, 0.0, 1e-7,
                       worst <= 1e-7, {"weights": (alpha, beta)}))

    # associativity (psi * S) * A = psi *_l (S * A)
    psi = symbol_family("phi_alpha", n=n, alpha=2.0)
    H = rng.normal(size=(basis.dim, basis.dim)) + 1j * rng.normal(size=(basis.dim, basis.dim))
    H = OperatorMatrix(basis, (H + H.conj().T) / 2)
    conv_op, _ = fun_conv_op(psi, H)
    SradH = radial_levels(H)
    BH = _radial_symbol_from_profile(
        "B(S)", lambda r: radialcalc.berezin_radial(SradH.level_sequence(), np.asarray(r)))
    worst = 0.0
    for rr in np.linspace(0.1, 0.6, 10):
        zpt = _axis_point(n, rr)
        lhs = op_conv_op(conv_op.to_matrix(), Phi, zpt)
        rhs = fun_conv_fun(psi, BH, zpt, conv_grid)
        worst = max(worst, abs(lhs - rhs))
    recs.append(Record("convolution.associativity", "(psi * S) * A = psi *_l (S * A)",
                       worst, 0.0, 1e-6, worst <= 1e-6, {}))

    # radial commutativity and the exchange identity
    A1 = phi_alpha(1.0, basis)
    A2 = phi_alpha(2.0, basis)
    worst = 0.0
    for rr in np.linspace(0.1, 0.7, 7):
        zpt = _axis_point(n, rr)
        worst = max(worst, abs(op_conv_op(A1.to_matrix(), A2, zpt)
                               - op_conv_op(A2.to_matrix(), A1, zpt)))
    recs.append(Record("convolution.radial_commutativity", "S * A = A * S for radial pairs",
                       worst, 0.0, 1e-8, worst <= 1e-8, {}))

    # exchange identity: S*A and S*B are bounded functions (radial when S is
    # radial); convolving them back against the other operator must commute
    Sgen = radial_levels(OperatorMatrix(basis, rng.normal(size=(basis.dim, basis.dim))
                                        + 1j * rng.normal(size=(basis.dim, basis.dim))))
    SA = _radial_symbol_from_profile(
        "S*A", lambda r: np.array([op_conv_op(Sgen.to_matrix(), A1, _axis_point(n, ri))
                                   for ri in np.atleast_1d(r)]))
    SB = _radial_symbol_from_profile(
        "S*B", lambda r: np.array([op_conv_op(Sgen.to_matrix(), A2, _axis_point(n, ri))
                                   for ri in np.atleast_1d(r)]))
    lhs_op, _ = fun_conv_op(SA, A2, num_nodes=2 * basis.D + 40)
    rhs_op, _ = fun_conv_op(SB, A1, num_nodes=2 * basis.D + 40)
    worst = float(np.max(np.abs(lhs_op.to_matrix().mat - rhs_op.to_matrix().mat)))
    recs.append(Record("convolution.exchange", "(S*A)*B = (S*B)*A for radial A, B",
                       worst, 0.0, 1e-6, worst <= 1e-6, {}))

    # Young-type and sup bounds
    worst = 0.0
    diag_young = {}
    psi1 = symbol_family("phi_alpha", n=n, alpha=3.0)  # unit invariant-measure mass
    Srand = rng.normal(size=(basis.dim, basis.dim)) + 1j * rng.normal(size=(basis.dim, basis.dim))
    Srand = OperatorMatrix(basis, Srand)
    conv, _ = fun_conv_op(psi1, Srand)
    for p in (1.0, 2.0, np.inf):
        lhs = schatten_norm(conv.to_matrix(), p)
        rhs = schatten_norm(radial_levels(Srand).to_matrix(), p)
        diag_young[f"p={p}"] = {"lhs": lhs, "rhs_bound": rhs}
        worst = max(worst, lhs - rhs)
    recs.append(Record("convolution.young_bound", "|psi * S|_p <= |psi|_1 |S|_p",
                       worst, 0.0, 1e-6, worst <= 1e-6, diag_young))

    A_bounded = Sgen
    S_tr = phi_alpha(2.0, basis)
    bound = schatten_norm(S_tr.to_matrix(), 1.0) * op_norm(A_bounded)
    worst = 0.0
    for rr in np.linspace(0.0, 0.8, 9):
        worst = max(worst, abs(op_conv_op(A_bounded, S_tr, _axis_point(n, rr))) - bound)
    recs.append(Record("convolution.sup_bound", "sup |A * S| <= |S|_1 |A|",
                       worst, 0.0, 1e-8, worst <= 1e-8, {"bound": bound}))

    # total integral of an operator-pair convolution
    lhs_prof = lambda t: np.array([op_conv_op(A1.to_matrix(), A2, _axis_point(n, np.sqrt(ti)))
                                   for ti in np.atleast_1d(t)])
    tt, wt = gauss_legendre_01(160)
    vals = lhs_prof(tt)
    total = np.sum(wt * vals * n * tt ** (n - 1) * (1 - tt) ** (-(n + 1)))
    want = trace(A1.to_matrix()) * trace(A2.to_matrix())
    err = abs(total - want)
    recs.append(Record("convolution.total_integral", "int (S * A) dlambda = Tr S Tr A",
                       err, 0.0, 1e-6, err <= 1e-6,
                       {"computed": float(np.real(total)), "expected": float(np.real(want))}))

    # function-side commutativity for radial pairs
    f1 = symbol_family("phi_alpha", n=n, alpha=1.0)
    f2 = symbol_family("phi_alpha", n=n, alpha=4.0)
    worst = 0.0
    for rr in (0.2, 0.5):
        zpt = _axis_point(n, rr)
        worst = max(worst, abs(fun_conv_fun(f1, f2, zpt, conv_grid) - fun_conv_fun(f2, f1, zpt, conv_grid)))
    recs.append(Record("convolution.radial_function_commutativity",
                       "f * g = g * f for radial f, g", worst, 0.0, 1e-8, worst <= 1e-8, {}))

    # sphere averages
    if n == 1:
        non_radial = symbol_family("harmonic_re", n=1)
        sharp = radialize_fun(non_radial, 1)
        err = float(np.max(np.abs(sharp.profile(np.linspace(0, 0.9, 7)))))
        mixed = SymbolFunction(name="mix", radial=False, bounded=True,
                               fn=lambda pts: (np.abs(np.atleast_2d(pts)[:, 0]) ** 2
                                               + np.real(np.atleast_2d(pts)[:, 0])).astype(complex))
        msharp = radialize_fun(mixed, 1)
        rr = np.linspace(0, 0.9, 7)
        err = max(err, float(np.max(np.abs(msharp.profile(rr) - rr ** 2))))
        recs.append(Record("convolution.sphere_average",
                           "circle averages kill the harmonic part", err, 0.0, 1e-12,
                           err <= 1e-12, {}))
    return recs


def _axis_point(n: int, r: float) -> np.ndarray:
    z = np.zeros(n, dtype=complex)
    z[0] = r
    return z


def _radial_symbol_from_profile(name: str, profile) -> SymbolFunction:
    return SymbolFunction(
        name=name, radial=True, bounded=True, profile=profile,
        fn=lambda pts: np.asarray(
            profile(np.sqrt(np.sum(np.abs(np.atleast_2d(pts)) ** 2, axis=-1))), dtype=complex))


# ---------------------------------------------------------------------------
# verify: oracle provenance block
# ---------------------------------------------------------------------------

def _checks_oracle(ctx: Context) -> list[Record]:
    recs: list[Record] = []
    basis, grid = ctx.basis, ctx.grid
    n, D = ctx.n, ctx.D

    worst = 0.0
    for sym in ctx.symbols:
        seq = radialcalc.moment_levels(sym.profile, n, D, breaks=sym.t_breaks)
        Tmat = ctx.toeplitz_of(sym)
        worst = max(worst, float(np.max(np.abs(np.diag(Tmat.mat)
                                               - seq.values[basis.degrees]))))
    recs.append(Record("oracle.moment_provenance",
                       "1-D moment levels = full-grid Toeplitz diagonals (all families)",
                       worst, 0.0, 1e-9, worst <= 1e-9, {"families": len(ctx.symbols)}))

    lev = ctx.rng.normal(size=D + 1)
    R = RadialOperator(basis, lev)
    from .space import ball2_grid, disc_grid
    fine0 = disc_grid(D + 8, D + 340) if n == 1 else ball2_grid(D + 8, D + 8, D + 64)
    radii = (0.15, 0.45, 0.75) if n == 1 else (0.15, 0.35, 0.55)
    worst = 0.0
    for rr in radii:
        closed = radialcalc.berezin_radial(R.level_sequence(), rr)
        # brute force: sample the kernel vector and quadrature the pairing;
        # the sampled kernel is not polynomial, hence the fine angular grid
        zpt = _axis_point(n, rr)
        kvals = ((1 - rr ** 2) ** (0.5 * (n + 1))
                 * kernel(KernelParams(0.0), zpt, fine0.points, n=n))
        coeffs = project(kvals, fine0, basis).coeffs
        brute = complex(coeffs.conj() @ (R.to_matrix().mat @ coeffs))
        worst = max(worst, abs(closed - brute))
    recs.append(Record("oracle.berezin_provenance",
                       "level power series = quadrature pairing of sampled kernels",
                       worst, 0.0, 1e-9, worst <= 1e-9, {}))

    # translation blocks against the sample-and-project reference; the
    # reference needs far more angular resolution than the model grid
    # because translated basis functions are not polynomials
    small = BasisSpec(n, min(D, 8))
    if n == 1:
        from .space import disc_grid
        fine = disc_grid(72, 320)
    else:
        from .space import ball2_grid
        fine = ball2_grid(24, 24, 64)
    worst = 0.0
    for zpt in ctx.sample_points(3, 0.5):
        exact = _tr.pi_matrix(small, zpt)
        sampled = _tr.pi_matrix_sampled(small, zpt, fine)
        worst = max(worst, float(np.max(np.abs(exact - sampled))))
    recs.append(Record("oracle.translation_provenance",
                       "closed-form translation blocks = sample-and-project reference",
                       worst, 0.0, 1e-8, worst <= 1e-8, {"degree": small.D}))
    return recs


def run_verify(cfg: dict) -> RunReport:
    ctx = Context(cfg)
    records: list[Record] = []
    for block in (_checks_geometry, _checks_space, _checks_operators,
                  _checks_convolution, _checks_oracle):
        records.extend(block(ctx))
    return RunReport(__version__, cfg, records, _summarize(records))


# ---------------------------------------------------------------------------
# convergence experiment
# ---------------------------------------------------------------------------

def _moment_nodes(n: int) -> tuple[np.ndarray, np.ndarray]:
    return gauss_legendre_01(200)


def _levels_from_profile_values(n: int, D: int, tt, wt, values) -> np.ndarray:
    k = np.arange(D + 1)[:, None]
    return ((n + k) * tt[None, :] ** (n + k - 1)) @ (wt * values)


def _norm_of_level_gap(n: int, gap: np.ndarray, which: str) -> float:
    d = radialcalc.level_multiplicities(n, gap.size - 1)
    if which == "op":
        return float(np.max(np.abs(gap)))
    p = float(which.split("-")[1])
    return float(np.sum(d * np.abs(gap) ** p) ** (1.0 / p))


def run_convergence(cfg: dict, out_dir: Path) -> tuple[RunReport, Path]:
    ctx = Context(cfg)
    n, D, basis = ctx.n, ctx.D, ctx.basis
    alphas = [float(a) for a in cfg["alpha_grid"]]
    tt, wt = _moment_nodes(n)
    rows: list[tuple] = []
    records: list[Record] = []

    def trend_record(name: str, errs: np.ndarray, norm_name: str, halving: bool = False):
        tail = errs[-5:] if errs.size >= 5 else errs
        noninc = bool(np.all(np.diff(tail) <= 1e-9))
        rec = Record(f"convergence.{name}", "distance of smoothed approximant is non-increasing in the weight",
                     float(tail[-1] - tail[0]), 0.0, 1e-9, noninc,
                     {"norm": norm_name, "e_first": float(errs[0]), "e_last": float(errs[-1])})
        records.append(rec)
        if halving:
            ok = errs[-1] < errs[0] / 2
            records.append(Record(f"convergence.{name}_halving",
                                  "distance at the top weight is below half the starting distance",
                                  float(errs[-1]), float(errs[0] / 2), 0.0, bool(ok),
                                  {"norm": norm_name}))

    # model radial Toeplitz operators per family
    for sym in ctx.symbols:
        S = toeplitz_radial(sym.profile, basis, breaks=sym.t_breaks)
        errs = []
        for alpha in alphas:
            bvals, rem = alpha_berezin_profile(S, alpha, tt)
            glev = _levels_from_profile_values(n, D, tt, wt, bvals)
            e = _norm_of_level_gap(n, glev - S.levels.real, cfg["norm"])
            errs.append(e)
            rows.append((f"model:{sym.name}", cfg["norm"], float(alpha), float(e),
                         float(rem), 0.0))
        trend_record(f"model_{sym.name}", np.array(errs), cfg["norm"])

    # exact infinite-dimensional reference for the quadratic-power symbol (disc)
    if n == 1:
        gam = radialcalc.moment_levels(lambda r: np.asarray(r) ** 2, 1, D).values.real
        errs = []
        for alpha in alphas:
            prof = radialcalc.balpha_profile_power(alpha, tt)
            glev = _levels_from_profile_values(1, D, tt, wt, prof)
            e = float(np.max(np.abs(glev - gam)))
            errs.append(e)
            rows.append(("exact:power(r^2)", "op", float(alpha), e, 0.0, 0.0))
        trend_record("exact_power1", np.array(errs), "op", halving=True)

    # finite-rank radial operators, trace-norm distance
    for name, R in (("rank_one_constants", phi(basis)), ("smoothing_w1", phi_alpha(1.0, basis))):
        errs = []
        for alpha in alphas:
            bvals, rem = alpha_berezin_profile(R, alpha, tt)
            glev = _levels_from_profile_values(n, D, tt, wt, bvals)
            e = _norm_of_level_gap(n, glev - R.levels.real, "schatten-1")
            # mass the re-quantized operator sheds beyond the model degree
            k_ext = np.arange(D + 1, 2 * D + 2)[:, None]
            out_tail = float(np.sum(np.abs(((n + k_ext) * tt[None, :] ** (n + k_ext - 1))
                                           @ (wt * bvals))))
            errs.append(e)
            rows.append((f"finite_rank:{name}", "schatten-1", float(alpha), float(e),
                         float(rem), out_tail))
        trend_record(f"finite_rank_{name}", np.array(errs), "schatten-1",
                     halving=(name == "rank_one_constants"))

    # composite: bounded symbol convolved with a trace-class smoothing operator
    step = symbol_family("step", n=n, r0=0.5)
    comp, diagc = fun_conv_op(step, phi_alpha(1.0, basis))
    errs = []
    for alpha in alphas:
        bvals, rem = alpha_berezin_profile(comp, alpha, tt)
        glev = _levels_from_profile_values(n, D, tt, wt, bvals)
        e = _norm_of_level_gap(n, glev - comp.levels.real, "op")
        errs.append(e)
        rows.append(("composite:step*smoothing_w1", "op", float(alpha), float(e), float(rem), 0.0))
    trend_record("composite_step_w1", np.array(errs), "op")

    # exploratory: non-radial rank-one probe, no assertion
    if n == 1:
        probe = np.zeros((basis.dim, basis.dim), dtype=complex)
        probe[0, 1] = 1.0  # e_0 (x) conj(e_1)
        for alpha in alphas:
            if not float(alpha).is_integer():
                continue
            bgrid = _nonradial_alpha_berezin_values(basis, probe, alpha, ctx.grid)
            Tb = toeplitz(bgrid, ctx.grid, basis)
            e = op_norm(Tb.mat - probe)
            rows.append(("exploratory:rank_one_shift", "op", float(alpha), float(e), 0.0, 0.0))

    # exploratory: user-supplied operator files
    for fname in cfg["operator_files"]:
        p = Path(fname)
        S_user = (load_levels_csv(p) if p.suffix == ".levels" or "levels" in p.name
                  else load_operator_csv(p))
        R_user = radial_levels(S_user)
        for alpha in alphas:
            bvals, rem = alpha_berezin_profile(R_user, alpha, tt)
            glev = _levels_from_profile_values(n, D, tt, wt, bvals)
            e = _norm_of_level_gap(n, glev - R_user.levels, cfg["norm"])
            rows.append((f"file:{p.name}", cfg["norm"], float(alpha), float(e), float(rem), 0.0))

    csv_path = out_dir / "convergence.csv"
    _write_csv(csv_path, ["operator", "norm", "alpha", "error", "level_remainder",
                          "requantization_tail"], rows)
    report = RunReport(__version__, cfg, records, _summarize(records))
    return report, csv_path


def _nonradial_alpha_berezin_values(basis: BasisSpec, S: np.ndarray, alpha: float,
                                    grid) -> np.ndarray:
    """Smoothed transform of a (possibly non-radial) operator on all grid nodes.

    Uses the rotation-phase structure per shell, so only one radial
    translation block is built per shell (disc model only).
    """
    lam = radialcalc.phi_alpha_levels(alpha, basis.n, basis.D).values
    lam_deg = lam[basis.degrees]
    degs = basis.degrees
    out = np.empty(grid.size, dtype=complex)
    for s_id, t in enumerate(grid.shell_t):
        sel = np.flatnonzero(grid.shell_id == s_id)
        Urad = _tr.pi_matrix_radial(basis, basis, float(t))
        M = Urad @ (lam_deg[:, None] * Urad)  # pi~(r) Phi_alpha at the real radius
        theta = np.angle(grid.points[sel, 0])
        # value(z) = sum_{jk} S_kj M_jk e^{-i(j-k)theta}
        C = S.T * M
        dmat = degs[:, None] - degs[None, :]
        coef = np.zeros(2 * basis.D + 1, dtype=complex)
        np.add.at(coef, (dmat + basis.D).ravel(), C.ravel())
        dvals = np.arange(-basis.D, basis.D + 1)
        out[sel] = np.exp(-1j * np.outer(theta, dvals)) @ coef
    return out


# ---------------------------------------------------------------------------
# criterion experiment
# ---------------------------------------------------------------------------

def run_criterion(cfg: dict, out_dir: Path) -> tuple[RunReport, Path]:
    ctx = Context(cfg)
    n, basis = ctx.n, ctx.basis
    alphas = [float(a) for a in cfg["criterion_alphas"]]
    radii_full = np.linspace(0.0, 0.95, 20)
    radii_engine = np.linspace(0.0, ctx.r_max, 9)
    rows: list[tuple] = []
    records: list[Record] = []

    for sym in ctx.symbols:
        sup = float(sym.sup_norm)
        T = toeplitz_radial(sym.profile, basis, breaks=sym.t_breaks)
        Tmat = T.to_matrix()
        worst_sym = 0.0
        for alpha in alphas:
            vals, rem = alpha_berezin_radial_toeplitz(sym.profile, alpha, radii_full ** 2,
                                                      n=n, breaks=sym.t_breaks)
            m_full = float(np.max(np.abs(vals)))
            m_engine = max(abs(alpha_berezin(Tmat, _axis_point(n, r), alpha))
                           for r in radii_engine)
            rows.append((sym.name, float(alpha), m_full, float(rem), m_engine, sup))
            worst_sym = max(worst_sym, m_full - rem - sup)
        records.append(Record(f"criterion.{sym.name}",
                              "sup over weights of the smoothed transform stays below sup|a|",
                              worst_sym, 0.0, 1e-6, worst_sym <= 1e-6,
                              {"sup_norm": sup}))

    # probes reported without assertion
    probe_rows = []
    S_shift = np.zeros((basis.dim, basis.dim), dtype=complex)
    S_shift[0, min(1, basis.dim - 1)] = 1.0
    S_alt = np.diag(((-1.0) ** basis.degrees).astype(complex))
    for pname, S_probe in (("rank_one_shift", S_shift), ("alternating_diag", S_alt)):
        for alpha in alphas:
            m = max(abs(alpha_berezin(OperatorMatrix(basis, S_probe), _axis_point(n, r), alpha))
                    for r in radii_engine)
            probe_rows.append((f"probe:{pname}", float(alpha), float(m), 0.0, float(m), float("nan")))
    rows.extend(probe_rows)

    csv_path = out_dir / "criterion.csv"
    _write_csv(csv_path, ["operator", "alpha", "max_abs_transform", "remainder",
                          "max_abs_engine", "sup_norm"], rows)
    report = RunReport(__version__, cfg, records, _summarize(records))
    return report, csv_path


# ---------------------------------------------------------------------------
# wiener recovery experiment
# ---------------------------------------------------------------------------

def _wiener_targets(name: str, n: int, Dw: int) -> np.ndarray:
    if name == "phi":
        lv = np.zeros(Dw + 1)
        lv[0] = 1.0
        return lv
    if name == "ones":
        return np.ones(Dw + 1)
    if name.startswith("phi_alpha:"):
        return radialcalc.phi_alpha_levels(float(name.split(":")[1]), n, Dw).values.real
    raise ConfigError(f"unknown recovery target {name}")


def run_wiener(cfg: dict, out_dir: Path) -> tuple[RunReport, Path]:
    n = int(cfg["n"])
    Dw = int(cfg["wiener"]["D"])
    M = radialcalc.moment_matrix(n, Dw)
    scale = np.linalg.norm(M, axis=0)
    Ms = M / scale
    cond_raw = float(np.linalg.cond(M))
    cond_scaled = float(np.linalg.cond(Ms))
    rows: list[tuple] = []
    records: list[Record] = []
    for target in cfg["wiener"]["targets"]:
        gam = _wiener_targets(target, n, Dw)
        res_by_J = []
        for J in range(1, Dw + 2):
            sol, *_ = np.linalg.lstsq(Ms[:, :J], gam, rcond=None)
            res = float(np.linalg.norm(Ms[:, :J] @ sol - gam))
            res_by_J.append(res)
            rows.append((target, J, res, cond_raw, cond_scaled))
        full_res = res_by_J[-1]
        coeffs = np.linalg.lstsq(Ms, gam, rcond=None)[0] / scale
        decreasing = bool(np.all(np.diff(res_by_J) < 0))
        records.append(Record(f"wiener.residual_{target}",
                              "column-scaled moment solve recovers the level target",
                              full_res, 0.0, 1e-8, full_res <= 1e-8,
                              {"cond_raw": cond_raw, "cond_scaled": cond_scaled,
                               "coefficients_head": [float(c) for c in coeffs[:3]]}))
        records.append(Record(f"wiener.residual_decay_{target}",
                              "fit residual strictly decreases with the profile degree",
                              float(np.max(np.diff(res_by_J))), 0.0, 0.0, decreasing, {}))
    csv_path = out_dir / "wiener.csv"
    _write_csv(csv_path, ["target", "J", "residual", "cond_raw", "cond_scaled"], rows)
    report = RunReport(__version__, cfg, records, _summarize(records))
    return report, csv_path


# ---------------------------------------------------------------------------
# tabulate
# ---------------------------------------------------------------------------

def run_tabulate(cfg: dict, out_dir: Path) -> list[Path]:
    ctx = Context(cfg)
    n, D = ctx.n, ctx.D
    paths = []

    rows = []
    for sym in ctx.symbols:
        seq = radialcalc.moment_levels(sym.profile, n, D, breaks=sym.t_breaks)
        for k, v in enumerate(seq.values):
            rows.append((sym.name, k, float(v.real), float(v.imag)))
    p = out_dir / "gamma_levels.csv"
    _write_csv(p, ["symbol", "k", "re", "im"], rows)
    paths.append(p)

    rows = []
    for alpha in cfg["alpha_grid"]:
        seq = radialcalc.phi_alpha_levels(float(alpha), n, D)
        for k, v in enumerate(seq.values):
            rows.append((float(alpha), k, float(v.real), float(v.imag)))
    p = out_dir / "phi_alpha_levels.csv"
    _write_csv(p, ["alpha", "k", "re", "im"], rows)
    paths.append(p)

    rows = []
    rr = np.linspace(0.0, 0.95, 40)
    for alpha in cfg["alpha_grid"]:
        Ca = c_alpha(n, float(alpha))
        for r in rr:
            rows.append((float(alpha), float(r), float(Ca * (1 - r * r) ** (n + 1 + alpha))))
    p = out_dir / "phi_alpha_profiles.csv"
    _write_csv(p, ["alpha", "r", "value"], rows)
    paths.append(p)
    return paths


# ---------------------------------------------------------------------------
# CLI wiring
# ---------------------------------------------------------------------------

def _finish(report: RunReport | None, out_dir: Path, name: str) -> None:
    if report is not None:
        report.write(out_dir / f"{name}_report.json")
        for r in report.records:
            marker = "PASS" if r.passed else "FAIL"
            click.echo(f"[{marker}] {r.name}: value={r.value:.3e} tol={r.tolerance:.1e}")
        s = report.summary
        click.echo(f"{name}: {s['pass']} passed, {s['fail']} failed")
        if s["fail"]:
            raise SystemExit(1)


def _prepare(config, seed, out):
    try:
        cfg = load_config(config, seed, out)
    except ConfigError as exc:
        click.echo(f"config error: {exc}", err=True)
        raise SystemExit(2)
    out_dir = Path(cfg["out_dir"])
    out_dir.mkdir(parents=True, exist_ok=True)
    return cfg, out_dir


@click.group()
@click.version_option(__version__)
def main():
    """Identity verification and convergence experiments on the truncated model."""


def _common_options(fn):
    fn = click.option("--config", type=click.Path(), default=None,
                      help="JSON config; defaults embedded")(fn)
    fn = click.option("--out", type=click.Path(), default=None, help="output directory")(fn)
    fn = click.option("--seed", type=int, default=None, help="RNG seed override")(fn)
    return fn


@main.command()
@_common_options
def verify(config, out, seed):
    """Run the full identity suite."""
    cfg, out_dir = _prepare(config, seed, out)
    _finish(run_verify(cfg), out_dir, "verify")


@main.command()
@_common_options
def convergence(config, out, seed):
    """Tabulate smoothed-approximant distances across the weight grid."""
    cfg, out_dir = _prepare(config, seed, out)
    report, csv_path = run_convergence(cfg, out_dir)
    click.echo(f"wrote {csv_path}")
    _finish(report, out_dir, "convergence")


@main.command()
@_common_options
def criterion(config, out, seed):
    """Tabulate sup bounds of the smoothed transforms."""
    cfg, out_dir = _prepare(config, seed, out)
    report, csv_path = run_criterion(cfg, out_dir)
    click.echo(f"wrote {csv_path}")
    _finish(report, out_dir, "criterion")


@main.command()
@_common_options
def wiener(config, out, seed):
    """Moment-system recovery of symbols from level sequences."""
    cfg, out_dir = _prepare(config, seed, out)
    report, csv_path = run_wiener(cfg, out_dir)
    click.echo(f"wrote {csv_path}")
    _finish(report, out_dir, "wiener")


@main.command()
@_common_options
def tabulate(config, out, seed):
    """Dump level and profile tables."""
    cfg, out_dir = _prepare(config, seed, out)
    for p in run_tabulate(cfg, out_dir):
        click.echo(f"wrote {p}")


if __name__ == "__main__":
    main()
