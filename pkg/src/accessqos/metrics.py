"""Throughput series, window averages and confidence intervals from event logs."""
from dataclasses import dataclass
import csv
import io

import numpy as np
from scipy import stats

from .core import NS_PER_S, to_ns


@dataclass
class ThroughputSeries:
    """``rates[flow, bin]`` in bit/s over bins of ``bin_width`` seconds."""
    bin_width: float
    rates: np.ndarray

    @property
    def n_flows(self):
        return self.rates.shape[0]

    @property
    def bin_starts(self):
        return np.arange(self.rates.shape[1]) * self.bin_width

    def delivered_bits(self):
        return self.rates.sum(axis=1) * self.bin_width

    def window_mean(self, t0, t1):
        """Mean rate per flow over the full bins inside ``[t0, t1)``."""
        lo = int(round(t0 / self.bin_width))
        hi = int(round(t1 / self.bin_width))
        return self.rates[:, lo:hi].mean(axis=1)


@dataclass
class WindowSummary:
    window: tuple
    per_run: np.ndarray      # shape (runs, flows), bit/s
    mean: np.ndarray
    ci95: np.ndarray

    @property
    def n_runs(self):
        return self.per_run.shape[0]


def bin_throughput(log, bin_width, horizon=None):
    """Attribute each departure to the half-open bin holding its timestamp."""
    if not bin_width > 0:
        raise ValueError("bin width must be positive")
    horizon = log.horizon if horizon is None else horizon
    width_ns = to_ns(bin_width)
    n_bins = -(-to_ns(horizon) // width_ns)
    subs, sizes, dep = log.departures()
    bins = dep // width_ns
    keep = bins < n_bins
    flat = subs[keep] * n_bins + bins[keep]
    bits = np.bincount(flat, weights=8.0 * sizes[keep],
                       minlength=log.n_subscribers * n_bins)
    return ThroughputSeries(bin_width, bits.reshape(log.n_subscribers, n_bins) / bin_width)


def window_throughput(log, t0, t1):
    """Exact per-flow mean rate over ``[t0, t1)`` from departure timestamps."""
    if not 0 <= t0 < t1 <= log.horizon + 1e-12:
        raise ValueError(f"window [{t0}, {t1}) outside the simulated horizon")
    subs, sizes, dep = log.departures()
    lo, hi = to_ns(t0), to_ns(t1)
    inside = (dep >= lo) & (dep < hi)
    bits = np.bincount(subs[inside], weights=8.0 * sizes[inside], minlength=log.n_subscribers)
    return bits / (t1 - t0)


def confidence_halfwidth(samples, level=0.95):
    """Student-t half-width across the first axis (n - 1 degrees of freedom)."""
    samples = np.asarray(samples, dtype=float)
    n = samples.shape[0]
    if n < 2:
        return np.full(samples.shape[1:], np.nan)
    sd = samples.std(axis=0, ddof=1)
    return stats.t.ppf(0.5 + level / 2, n - 1) * sd / np.sqrt(n)


def summarize(window, runs, horizon=None):
    """Per-flow mean and 95% CI over ``window`` across independent runs.

    ``runs`` holds event logs or :class:`ThroughputSeries`; series are
    averaged over their bins inside the window.
    """
    t0, t1 = window
    rows = []
    for r in runs:
        if isinstance(r, ThroughputSeries):
            end = r.rates.shape[1] * r.bin_width if horizon is None else horizon
            if not 0 <= t0 < t1 <= end + 1e-9:
                raise ValueError(f"window [{t0}, {t1}) outside the simulated horizon")
            rows.append(r.window_mean(t0, t1))
        else:
            rows.append(window_throughput(r, t0, t1))
    per_run = np.vstack(rows)
    return WindowSummary((t0, t1), per_run, per_run.mean(axis=0), confidence_halfwidth(per_run))


def group_means(values, groups):
    """Average a per-flow vector over named groups (keeps first-seen order)."""
    out = {}
    for name in dict.fromkeys(groups):
        idx = [i for i, g in enumerate(groups) if g == name]
        out[name] = float(np.mean(np.asarray(values)[idx]))
    return out


def series_csv(series_by_run):
    """CSV text with columns ``run,flow,bin_start_s,throughput_bps``."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["run", "flow", "bin_start_s", "throughput_bps"])
    for run_idx, series in enumerate(series_by_run):
        starts = [repr(float(x)) for x in series.bin_starts]
        for flow in range(series.n_flows):
            for start, value in zip(starts, series.rates[flow].tolist()):
                w.writerow([run_idx, flow, start, repr(value)])
    return buf.getvalue()


def summary_csv(summary):
    """CSV text with columns ``flow,mean_bps,ci95_bps``."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["flow", "mean_bps", "ci95_bps"])
    for flow, (m, c) in enumerate(zip(summary.mean.tolist(), summary.ci95.tolist())):
        w.writerow([flow, repr(m), repr(c)])
    return buf.getvalue()


def read_series_csv(text):
    """Inverse of :func:`series_csv`; returns a list of series (one per run)."""
    rows = list(csv.DictReader(io.StringIO(text)))
    if not rows:
        return []
    runs = sorted({int(r["run"]) for r in rows})
    flows = max(int(r["flow"]) for r in rows) + 1
    starts = sorted({float(r["bin_start_s"]) for r in rows})
    width = starts[1] - starts[0] if len(starts) > 1 else 1.0
    out = []
    for run_idx in runs:
        rates = np.zeros((flows, len(starts)))
        for r in rows:
            if int(r["run"]) == run_idx:
                rates[int(r["flow"]), int(round(float(r["bin_start_s"]) / width))] = float(r["throughput_bps"])
        out.append(ThroughputSeries(width, rates))
    return out


__all__ = ["ThroughputSeries", "WindowSummary", "bin_throughput", "window_throughput",
           "confidence_halfwidth", "summarize", "group_means", "series_csv",
           "summary_csv", "read_series_csv", "NS_PER_S"]
