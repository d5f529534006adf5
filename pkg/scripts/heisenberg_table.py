"""Classification, psi^2 spectrum and Ricci data for weighted Heisenberg algebras."""
import argparse
from dataclasses import dataclass, field
from fractions import Fraction

from aqs.quaternionic import build_weighted_heisenberg, double_aqs_check
from aqs.structures import classify, eta_einstein_fit, psi_spectrum, rank_of_eta
from aqs.tensor import to_fraction


@dataclass
class Config:
    weights: list = field(default_factory=lambda: ["1", "1,1", "1,2", "1,0", "1,2,3", "3,5"])


def row(weights):
    alg, t = build_weighted_heisenberg(weights)
    flags = []
    for s in t.structures:
        c = classify(s)
        if c["sasakian"]:
            flags.append("Sas")
        elif c["quasi_sasakian"]:
            flags.append("qS")
        elif c["anti_quasi_sasakian"]:
            flags.append("aqS")
        else:
            flags.append("-")
    s = t[0]
    r = rank_of_eta(s)
    spec = ", ".join(f"{v:+.4g}^{m}" for v, m in psi_spectrum(s).clusters)
    ric = s.geom.ricci.val
    fit = eta_einstein_fit(s)
    eta_e = f"mu={fit.mu} nu={fit.nu}" if fit.eta_einstein else "no"
    return (f"{','.join(str(w) for w in weights):>8}  dim={alg.dim:2d}  "
            f"phi1..3={'/'.join(flags):12s} (p,q)=({r.p},{r.q})  "
            f"Ric(xi,xi)={to_fraction(ric[0, 0])}  eta-Einstein: {eta_e:14s} "
            f"double={double_aqs_check(t).ok}  Sp(psi^2)={{{spec}}}")


def main(cfg: Config):
    for w in cfg.weights:
        print(row([Fraction(x) for x in w.split(",")]))


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("weights", nargs="*", help="weight vectors such as 1,2")
    args = ap.parse_args()
    main(Config(args.weights) if args.weights else Config())
