"""Compare the numba and numpy kernel backends.

    python benchmarks/bench_kernels.py            # reference 71x71 link, 36 modes
    python benchmarks/bench_kernels.py --half 20  # smaller arrays

Times ``G @ W_tx`` streamed over RX rows (the cost of one H^mod) and a
Hermite table, reports the median of ``--repeat`` runs after a warm-up call
that also triggers JIT compilation, and checks that both backends agree.
"""
import argparse
import statistics
import time

import numpy as np

from hgmimo import _kernels as K
from hgmimo.channel import ElementPattern, boresight_link
from hgmimo.config import ScenarioConfig
from hgmimo.geometry import ArrayGeometry
from hgmimo.txrx import ModeSet, mode_filters


def timed(fn, repeat):
    fn()
    times = []
    for _ in range(repeat):
        start = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - start)
    return statistics.median(times), out


def main():
    parser = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--half", type=int, default=35, help="array half count N (elements per side 2N+1)")
    parser.add_argument("--modes", type=int, default=5, help="l_max = m_max of the mode set")
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()

    if not K.HAVE_NUMBA:
        raise SystemExit("numba is not installed; nothing to compare")
    cfg = ScenarioConfig()
    beam = cfg.beam()
    tx = ArrayGeometry.square(args.half, 0.005, -cfg.distance_m / 2)
    rx = ArrayGeometry.square(args.half, 0.005, cfg.distance_m / 2)
    link = boresight_link(beam.wavelength, tx, rx, pattern=ElementPattern.sectorized())
    w = mode_filters(beam, tx, ModeSet.rectangular(args.modes, args.modes)).matrix
    print(f"arrays {tx.shape[0]}x{tx.shape[1]} ({tx.size} elements each), {w.shape[1]} modes, "
          f"numba {K.numba_version}")

    t_np, ref = timed(lambda: link.apply(w, backend="numpy"), args.repeat)
    t_nb, got = timed(lambda: link.apply(w, backend="numba"), args.repeat)
    rel = np.max(np.abs(got - ref)) / np.max(np.abs(ref))
    print(f"channel_apply  numpy {t_np:8.3f} s   numba {t_nb:8.3f} s   speedup {t_np / t_nb:5.2f}x   "
          f"max rel diff {rel:.1e}")

    import numba
    print(f"numba threading layer: {numba.threading_layer()}, threads: {numba.get_num_threads()}")

    x = np.linspace(-8, 8, 2_000_000)
    t_np, ref = timed(lambda: K.hermite_table_numpy(10, x), args.repeat)
    t_nb, got = timed(lambda: K.hermite_table_numba(10, x), args.repeat)
    print(f"hermite_table  numpy {t_np:8.3f} s   numba {t_nb:8.3f} s   speedup {t_np / t_nb:5.2f}x   "
          f"max rel diff {np.max(np.abs(got - ref) / np.maximum(np.abs(ref), 1)):.1e}")


if __name__ == "__main__":
    main()
