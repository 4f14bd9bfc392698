"""Optional PNG rendering for CLI outputs.

Figures are a convenience view of the delimited data files, not a data
product: every plot is rendered from the same arrays that were written to
disk, with a non-interactive backend.
"""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)
import numpy as np  # noqa: E402


def plot_curve(detunings_mhz, values, path, title=""):
    """Real and imaginary susceptibility versus detuning."""
    fig, ax = plt.subplots(figsize=(7, 4.5))
    ax.plot(detunings_mhz, np.real(values), label="Re chi")
    ax.plot(detunings_mhz, np.imag(values), label="Im chi")
    ax.set_xlabel("signal detuning (MHz)")
    ax.set_ylabel("susceptibility (dimensionless)")
    if title:
        ax.set_title(title)
    ax.legend()
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_pulse(times_us, intensity_in, intensity_out, path, title=""):
    """Input and output intensity envelopes."""
    fig, ax = plt.subplots(figsize=(7, 4.5))
    ax.plot(times_us, intensity_in, label="input")
    ax.plot(times_us, intensity_out, label="output")
    ax.set_xlabel("time (us)")
    ax.set_ylabel("intensity (peak-normalized input units)")
    if title:
        ax.set_title(title)
    ax.legend()
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_sweep(axis_values, columns, path, xlabel="", title=""):
    """One subplot per swept quantity.

    ``columns`` maps a label to an array aligned with ``axis_values``;
    non-finite entries (failed sweep points) are simply skipped.
    """
    labels = [k for k in columns]
    fig, axes = plt.subplots(len(labels), 1, figsize=(7, 2.6 * len(labels)),
                             sharex=True, squeeze=False)
    x = np.asarray(axis_values, dtype=float)
    for ax, label in zip(axes[:, 0], labels):
        y = np.asarray(columns[label], dtype=float)
        ok = np.isfinite(y)
        ax.plot(x[ok], y[ok], marker="o")
        ax.set_ylabel(label)
        ax.grid(True, alpha=0.3)
    axes[-1, 0].set_xlabel(xlabel or "swept value")
    if title:
        axes[0, 0].set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
