"""The four figure families.

Each function turns one ResultTable into a matplotlib Figure; file output
(and format choice) belongs to the CLI.  Nothing here recomputes physics —
these are straight CSV-to-image transforms, so a regenerated figure can only
change if the underlying table changed.
"""

from __future__ import annotations

import math

import matplotlib

# Batch scripts only: pin the backend before pyplot is touched so imports
# behave the same on headless runners, and salt SVG ids for stable output.
matplotlib.use("Agg")
matplotlib.rcParams["svg.hashsalt"] = "planar-plots"

import matplotlib.pyplot as plt  # noqa: E402

_FIGSIZE = (5.4, 3.7)
_LINESTYLES = ("-", "--", ":", "-.")


def _new_axes():
    fig, ax = plt.subplots(figsize=_FIGSIZE)
    ax.grid(True, which="both", alpha=0.25, lw=0.5)
    return fig, ax


def _finish(fig, ax):
    ax.legend(fontsize=8, framealpha=0.9)
    fig.tight_layout()
    return fig


def plot_measurement_error(table):
    """Measurement error q against mean photon number, one curve per N.

    With several POVMs in one table the POVM is folded into the legend and
    the line style, so a combined sweep still reads as per-N families.
    """
    rows = table.rows
    povms = sorted({r["povm"] for r in rows})
    ns = sorted({int(r["N"]) for r in rows})
    colors = plt.rcParams["axes.prop_cycle"].by_key()["color"]
    fig, ax = _new_axes()
    for n in ns:
        for povm in povms:
            sel = sorted((r for r in rows
                          if int(r["N"]) == n and r["povm"] == povm),
                         key=lambda r: float(r["nbar"]))
            if not sel:
                continue
            label = f"N={n}" if len(povms) == 1 else f"N={n}, {povm}"
            ax.errorbar([float(r["nbar"]) for r in sel],
                        [float(r["q"]) for r in sel],
                        yerr=[float(r["stderr"]) for r in sel],
                        marker="o", ms=4, lw=1.2, capsize=2,
                        color=colors[ns.index(n) % len(colors)],
                        ls=_LINESTYLES[povms.index(povm) % len(_LINESTYLES)],
                        label=label)
    ax.set_yscale("log")
    ax.set_xlabel(r"$\bar{n}$")
    ax.set_ylabel("measurement error $q$")
    return _finish(fig, ax)


def plot_chain1d(table):
    """Teleportation infidelity along the 1D chain against loss strength."""
    rows = table.rows
    qsis = sorted({r["qsi"] for r in rows})
    fig, ax = _new_axes()
    for i, (povm, qsi) in enumerate(sorted({(r["povm"], r["qsi"])
                                            for r in rows})):
        sel = sorted((r for r in rows
                      if r["povm"] == povm and r["qsi"] == qsi),
                     key=lambda r: float(r["gamma"]))
        label = povm if len(qsis) == 1 else f"{povm}, {qsi}"
        ax.errorbar([float(r["gamma"]) for r in sel],
                    [1.0 - float(r["fidelity"]) for r in sel],
                    yerr=[float(r["stderr"]) for r in sel],
                    marker="o", ms=4, lw=1.2, capsize=2,
                    ls=_LINESTYLES[i % len(_LINESTYLES)], label=label)
    ax.set_yscale("log")
    ax.set_xlabel(r"loss strength $\gamma$")
    ax.set_ylabel(r"infidelity $1-F$")
    return _finish(fig, ax)


def plot_threshold_scatter(table, normalized=False):
    """Loss threshold against the effective measurement error at crossing.

    Bosonic fits scatter as one series per N (the decoder joins the label
    when several are present).  Projective-injection fits have no loss axis
    at all — their critical value *is* a measurement error rate — so they
    are drawn as vertical reference lines.  ``normalized`` rescales the
    threshold axis by the mean photon number of each code.
    """
    rows = [r for r in table.rows if not math.isnan(float(r["gamma_c"]))]
    ref = [r for r in rows if r["qsi"] == "projective"]
    data = [r for r in rows if r["qsi"] != "projective"]
    if not data and not ref:
        raise ValueError("no threshold fits to plot (all rows NaN or absent)")
    decoders = sorted({r["decoder"] for r in data})
    fig, ax = _new_axes()
    for n, dec in sorted({(int(r["N"]), r["decoder"]) for r in data}):
        sel = [r for r in data if int(r["N"]) == n and r["decoder"] == dec]
        scale = [float(r["nbar"]) if normalized else 1.0 for r in sel]
        y = [s * float(r["gamma_c"]) for s, r in zip(scale, sel)]
        lo = [s * (float(r["gamma_c"]) - float(r["ci_lo"]))
              for s, r in zip(scale, sel)]
        hi = [s * (float(r["ci_hi"]) - float(r["gamma_c"]))
              for s, r in zip(scale, sel)]
        label = f"N={n}" if len(decoders) == 1 else f"N={n}, {dec}"
        ax.errorbar([float(r["q"]) for r in sel], y, yerr=[lo, hi],
                    fmt="o", ms=5, capsize=3, label=label)
    for r in ref:
        label = ("projective" if len(ref) == 1
                 else f"projective, {r['decoder']}")
        ax.axvline(float(r["gamma_c"]), color="0.35", ls="--", lw=1.0,
                   label=label)
    ax.set_xlabel("effective measurement error $q$")
    ax.set_ylabel(r"$\bar{n}\,\gamma_c$" if normalized else r"$\gamma_c$")
    return _finish(fig, ax)


def plot_alpha(table, normalized=False):
    """Sub-threshold decay exponent, one series per decoder.

    The normalized variant plots against the relative distance below
    threshold, which needs a ``gamma_c`` column joined into the fits table;
    without one we abort rather than guess a threshold.
    """
    if normalized and "gamma_c" not in table.columns:
        raise ValueError(
            "missing column 'gamma_c': the normalized alpha plot needs the "
            "threshold joined into the fits table")
    rows = [r for r in table.rows if not math.isnan(float(r["alpha"]))]
    if not rows:
        raise ValueError("no alpha fits to plot (all rows NaN or absent)")
    qsis = sorted({r["qsi"] for r in rows})
    fig, ax = _new_axes()
    for i, (dec, qsi) in enumerate(sorted({(r["decoder"], r["qsi"])
                                           for r in rows})):
        sel = [r for r in rows if r["decoder"] == dec and r["qsi"] == qsi]
        if normalized:
            xs = [(float(r["gamma_c"]) - float(r["gamma"]))
                  / float(r["gamma_c"]) for r in sel]
        else:
            xs = [float(r["gamma"]) for r in sel]
        order = sorted(range(len(sel)), key=lambda k: xs[k])
        label = dec if len(qsis) == 1 else f"{dec}, {qsi}"
        ax.errorbar([xs[k] for k in order],
                    [float(sel[k]["alpha"]) for k in order],
                    yerr=[float(sel[k]["stderr"]) for k in order],
                    marker="s", ms=4, lw=1.2, capsize=2,
                    ls=_LINESTYLES[i % len(_LINESTYLES)], label=label)
    ax.set_xlabel(r"$(\gamma_c-\gamma)/\gamma_c$" if normalized
                  else r"loss strength $\gamma$")
    ax.set_ylabel(r"scaling exponent $\alpha$")
    return _finish(fig, ax)
