"""Canonical connection, uniqueness and splitting across the Lie-algebra fixtures."""
from dataclasses import dataclass

from aqs.connections import (canonical_connection, decomposition_check, local_symmetry_probe,
                             parallel_torsion_test, reconstruct_h)
from aqs.quaternionic import build_weighted_heisenberg, skewed_frame_triple
from aqs.structures import KahlerFactor, abelian_cokahler, classify, product_with_kahler


@dataclass
class Config:
    weights: tuple = ((1,), (1, 2), (1, 0), (2, 0, 1))
    skew_seed: int = 0


def fixtures(cfg: Config):
    for w in cfg.weights:
        yield f"heisenberg{w}", build_weighted_heisenberg(list(w))[1][0]
    yield "abelian", abelian_cokahler(5)
    h = build_weighted_heisenberg([1])[1][0]
    yield "heisenberg(1) x R^4", product_with_kahler(h, KahlerFactor.standard(4))
    yield "skewed(1,2)", skewed_frame_triple((1, 2), seed=cfg.skew_seed)[0].with_tol(1e-8)


def main(cfg: Config):
    for name, s in fixtures(cfg):
        conn = canonical_connection(s)
        pt = parallel_torsion_test(conn)
        rec = reconstruct_h(s)
        line = (f"{name:22s} dim={s.dim:2d} connection ok={conn.ok!s:5s} "
                f"unique H={rec.unique!s:5s} nabla_bar psi=0: {pt.ok!s:5s}")
        if pt.ok:
            d = decomposition_check(s)
            eig = ", ".join(f"{b.eigenvalue}" for b in d.eigen_blocks)
            line += f" split aqS {d.aqs.dim} + Kahler {d.kahler.dim} (eigenvalues {eig or '-'})"
        if s.exact and not classify(s)["cokahler"]:
            line += f" |nabla R|max={float(local_symmetry_probe(s.host).max_entry):.3g}"
        print(line)


if __name__ == "__main__":
    main(Config())
