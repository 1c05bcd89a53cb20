from pathlib import Path

VECTOR_DIR = Path(__file__).parent / "vectors"


def frozen_energy(pol, xi, tag, dphi):
    """Look up one row of the frozen direct-quadrature energy table."""
    for line in (VECTOR_DIR / "energies.txt").read_text().splitlines():
        if not line or line.startswith("#"):
            continue
        f = line.split()
        if (
            f[0] == pol
            and abs(float(f[1]) - xi) < 1e-12
            and f[2] == tag
            and abs(float(f[4]) - dphi) < 1e-9
        ):
            return {
                "p_minus": float(f[3]),
                "w_minkowski": float(f[5]),
                "w_crossproduct": float(f[6]),
                "error_estimate": float(f[8]),
                "converged": bool(int(f[9])),
            }
    raise KeyError(f"no frozen energy row for {pol} xi={xi} {tag} dphi={dphi}")
