"""Sweep the disc bundle over curvature constants and compare with closed forms.

For each sample point the quadruple psi^2 eigenvalue is compared with
-lambda^2 = -c^2 (1-|z|^2)^3 / 64 and the eta-Einstein fit with
mu = 3c/2 - 2 lambda^2, nu = 6 lambda^2 - 3c/2.
"""
import argparse
import csv
import sys
from dataclasses import dataclass, field

from aqs.connections import canonical_connection, parallel_torsion_test
from aqs.patch import builtin_disc_bundle, disc_lambda_sq
from aqs.structures import AcmStructure, classify, eta_einstein_fit, psi_spectrum


@dataclass
class Config:
    cs: list = field(default_factory=lambda: [-1.0, -4.0, -8.0])
    points: int = 32
    seed: int = 0
    tol: float = 1e-8
    csv: str | None = None


def sweep(cfg: Config):
    rows = []
    for c in cfg.cs:
        _, ps = builtin_disc_bundle(c, cfg.points, cfg.seed)
        for x in ps.samples:
            s = AcmStructure.on_patch(ps, x, tol=cfg.tol)
            lam2 = disc_lambda_sq(c, x)
            quad = [v for v, m in psi_spectrum(s).clusters if m == 4][0]
            fit = eta_einstein_fit(s)
            conn = canonical_connection(s)
            rows.append({
                "c": c, "r2": float(sum(x[:4] ** 2)), "lambda_sq": lam2,
                "spec_err": abs(quad + lam2),
                "mu_err": abs(fit.mu - (1.5 * c - 2 * lam2)),
                "nu_err": abs(fit.nu - (6 * lam2 - 1.5 * c)),
                "aqs": classify(s)["anti_quasi_sasakian"],
                "connection_ok": conn.ok,
                "nabla_bar_psi_zero": parallel_torsion_test(conn).ok,
            })
    return rows


def main(cfg: Config):
    rows = sweep(cfg)
    for c in cfg.cs:
        sub = [r for r in rows if r["c"] == c]
        print(f"c={c:+g}: {len(sub)} points, aqS everywhere={all(r['aqs'] for r in sub)}, "
              f"connection ok={all(r['connection_ok'] for r in sub)}, "
              f"nabla_bar psi = 0 somewhere={any(r['nabla_bar_psi_zero'] for r in sub)}")
        print(f"    max |spec err|={max(r['spec_err'] for r in sub):.2e}  "
              f"max |mu err|={max(r['mu_err'] for r in sub):.2e}  "
              f"max |nu err|={max(r['nu_err'] for r in sub):.2e}")
    if cfg.csv:
        with open(cfg.csv, "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=list(rows[0]))
            w.writeheader()
            w.writerows(rows)
        print(f"wrote {len(rows)} rows to {cfg.csv}", file=sys.stderr)


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--c", type=float, nargs="+", default=Config().cs)
    ap.add_argument("--points", type=int, default=Config.points)
    ap.add_argument("--seed", type=int, default=Config.seed)
    ap.add_argument("--csv")
    a = ap.parse_args()
    main(Config(a.c, a.points, a.seed, csv=a.csv))
