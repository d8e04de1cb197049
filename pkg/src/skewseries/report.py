"""JSON reports and the figures written next to them."""

from __future__ import annotations

import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .suites import SuiteResult  # noqa: E402


def _jsonable(obj):
    import numpy as np

    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, float) and obj == float("inf"):
        return "inf"
    return obj


def report_dict(result: SuiteResult, spec: dict, figures: list[str]) -> dict:
    d = result.to_dict()
    d["instance_spec"] = spec
    d["figures"] = figures
    return _jsonable(d)


def dumps(report: dict) -> str:
    return json.dumps(report, sort_keys=True, indent=2) + "\n"


def _save(fig, path: Path) -> None:
    fig.tight_layout()
    # fixed metadata keeps repeated runs byte-identical
    fig.savefig(path, dpi=100, metadata={"Software": None})
    plt.close(fig)


def render_figures(result: SuiteResult, out: Path) -> list[str]:
    """One PNG per suite that produced plot data, named after the report file."""
    stem = out.with_suffix("")
    names = []
    for key in sorted(result.plots):
        data = result.plots[key]
        fig, ax = plt.subplots(figsize=(5, 3.5))
        if key == "nilpotence":
            ax.plot(range(len(data["lattice_logs"])), data["lattice_logs"], "o-")
            ax.set_xlabel("word length k")
            ax.set_ylabel("log_p |V_k|")
            ax.set_title(f"{result.instance}: image lattices of delta-words")
        elif key == "filtration":
            ax.plot(range(len(data["log_orders"])), data["log_orders"], "s-", label="log_p |I_k|")
            ax.bar(range(len(data["graded_dims"])), data["graded_dims"], alpha=0.4, label="dim gr_k")
            ax.set_xlabel("k")
            ax.legend(frameon=False)
            ax.set_title(f"{result.instance}: filtration I_k")
        elif key == "exactness":
            for label, dims in sorted(data["image_dims"].items()):
                ax.plot(data["T"], dims, "o-", label=label)
            ax.set_xlabel("T")
            ax.set_ylabel("log_p |im kappa|")
            ax.legend(frameon=False, fontsize=7)
            ax.set_title(f"{result.instance}: truncated kappa")
        elif key == "dual-action":
            for label, dims in sorted(data.items()):
                ax.plot(range(len(dims)), dims, "o-", label=label)
            ax.set_xlabel("k")
            ax.set_ylabel("log_p |{f^(t^k)}|")
            ax.legend(frameon=False, fontsize=7)
            ax.set_title(f"{result.instance}: dual images under t")
        elif key == "ext-shift":
            labels = sorted(data)
            width = 0.35
            for i, label in enumerate(labels):
                s, r = data[label]["S"], data[label]["R"]
                for j, v in enumerate(s):
                    ax.bar(i + j * 0.1 - width / 2, v, 0.08, color="C0")
                for j, v in enumerate(r):
                    ax.bar(i + (j + 1) * 0.1 + width / 2, v, 0.08, color="C1")
            ax.set_xticks(range(len(labels)))
            ax.set_xticklabels(labels, fontsize=7, rotation=20)
            ax.set_ylabel("log_p size (Ext_S^j blue, Ext_R^(j-1) orange)")
            ax.set_title(f"{result.instance}: Ext degree shift")
        elif key == "laurent":
            labels = sorted(data)
            ax.bar(labels, [data[k]["image_kappa"] for k in labels])
            ax.set_ylabel("log_p |im kappa| on the window")
            ax.set_title(f"{result.instance}: Laurent sequence")
        else:
            plt.close(fig)
            continue
        path = Path(f"{stem}_{key}.png")
        _save(fig, path)
        names.append(path.name)
    return names


def write_report(result: SuiteResult, spec: dict, out: str | Path, figures: bool = True) -> dict:
    out = Path(out)
    out.parent.mkdir(parents=True, exist_ok=True)
    names = render_figures(result, out) if figures else []
    report = report_dict(result, spec, names)
    out.write_text(dumps(report))
    timing_path = out.with_suffix(".timings.json")
    timing_path.write_text(json.dumps({k: round(v, 3) for k, v in sorted(result.timings.items())},
                                      indent=2) + "\n")
    return report
