import logging
import math
from pathlib import Path
from typing import Any, Dict, List, Optional

import pandas as pd
from jinja2 import Template

from metrics.report import EvalReport
from utils.file_handler import FileHandler

logger = logging.getLogger(__name__)

SUMMARY_COLUMNS = [
    "scenario", "seed", "attack", "dataset",
    "precision", "recall", "fpr", "auroc", "auprc", "fpr_at_95tpr",
    "mmps_fp", "mmps_tn", "ece", "oe", "emd_vs_members",
    "tp", "fp", "tn", "fn", "degenerate", "threshold",
]

RUN_TEMPLATE = """<!DOCTYPE html>
<html lang="en">
<head>
    <meta charset="UTF-8">
    <title>Membership inference audit: {{ meta.experiment }} / {{ meta.scenario }}</title>
    <style>
        body { font-family: 'Segoe UI', Tahoma, Geneva, Verdana, sans-serif; margin: 20px; background: #f5f5f5; }
        .container { max-width: 1400px; margin: 0 auto; background: white; padding: 30px; border-radius: 10px; }
        table { border-collapse: collapse; margin-bottom: 30px; width: 100%; }
        th, td { border: 1px solid #dee2e6; padding: 6px 10px; text-align: right; }
        th { background: #f8f9fa; }
        td.label { text-align: left; }
        .metric-card { display: inline-block; background: #f8f9fa; padding: 15px; border-radius: 8px; margin: 5px; }
        .metric-value { font-size: 1.6em; font-weight: bold; color: #2c3e50; }
        .metric-label { color: #6c757d; font-size: 0.9em; }
    </style>
</head>
<body>
<div class="container">
    <h1>Membership inference audit</h1>
    <p>Experiment <b>{{ meta.experiment }}</b>, scenario <b>{{ meta.scenario }}</b>, seed {{ meta.seed }},
       config {{ meta.config_hash[:12] }}</p>
    {% for key, value in model.items() %}
    <div class="metric-card">
        <div class="metric-value">{{ fmt(value) }}</div>
        <div class="metric-label">{{ key }}</div>
    </div>
    {% endfor %}
    <h2>Attacks per dataset</h2>
    <table>
        <tr>{% for column in columns %}<th>{{ column }}</th>{% endfor %}</tr>
        {% for row in rows %}
        <tr>{% for column in columns %}
            <td{% if column in ('attack', 'dataset') %} class="label"{% endif %}>{{ fmt(row[column]) }}</td>
        {% endfor %}</tr>
        {% endfor %}
    </table>
    <h2>Mean maximum prediction score per dataset</h2>
    <table>
        <tr><th>dataset</th><th>MMPS</th></tr>
        {% for dataset, value in profile.items() %}
        <tr><td class="label">{{ dataset }}</td><td>{{ fmt(value) }}</td></tr>
        {% endfor %}
    </table>
</div>
</body>
</html>
"""

COMPARISON_TEMPLATE = """<!DOCTYPE html>
<html lang="en">
<head>
    <meta charset="UTF-8">
    <title>Membership inference audit: scenario comparison</title>
    <style>
        body { font-family: 'Segoe UI', Tahoma, Geneva, Verdana, sans-serif; margin: 20px; background: #f5f5f5; }
        .container { max-width: 1600px; margin: 0 auto; background: white; padding: 30px; border-radius: 10px; }
        table { border-collapse: collapse; margin-bottom: 30px; }
        th, td { border: 1px solid #dee2e6; padding: 6px 10px; text-align: right; }
        th { background: #f8f9fa; }
        td.label { text-align: left; }
        td.up { color: #c0392b; }
        td.down { color: #27ae60; }
    </style>
</head>
<body>
<div class="container">
    <h1>Scenario comparison</h1>
    <p>{{ runs }} runs, scenarios: {{ scenarios | join(', ') }}</p>
    <table>
        <tr>{% for column in columns %}<th>{{ column }}</th>{% endfor %}</tr>
        {% for row in rows %}
        <tr>{% for column in columns %}
            {% set value = row[column] %}
            <td class="{% if column in ('scenario', 'attack', 'dataset') %}label{% elif column.startswith('delta_') and value is number and value > 0 %}up{% elif column.startswith('delta_') and value is number and value < 0 %}down{% endif %}">{{ fmt(value) }}</td>
        {% endfor %}</tr>
        {% endfor %}
    </table>
    <h2>Earth mover's distance, members vs. nonmembers (max scores)</h2>
    <table>
        <tr><th>scenario</th><th>dataset</th><th>EMD</th></tr>
        {% for row in emd %}
        <tr><td class="label">{{ row.scenario }}</td><td class="label">{{ row.dataset }}</td><td>{{ fmt(row.emd) }}</td></tr>
        {% endfor %}
    </table>
</div>
</body>
</html>
"""


def json_safe(value: Any) -> Any:
    """Replace NaN and infinities (recursively) with None so strict JSON can be written."""
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, dict):
        return {k: json_safe(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [json_safe(v) for v in value]
    return value


def format_value(value: Any) -> str:
    """Format a table cell for display."""
    if value is None or (isinstance(value, float) and math.isnan(value)):
        return "n/a"
    if isinstance(value, bool):
        return "yes" if value else "no"
    if isinstance(value, float):
        return f"{value:.4f}"
    return str(value)


class ResultHandler:
    """Writes evaluation reports, summary tables and the HTML overview of a run."""

    def __init__(self, config: Dict[str, Any], file_handler: FileHandler):
        """
        Initialize ResultHandler.

        Args:
            config: Main configuration dictionary
            file_handler: File handler of the run directory
        """
        self.config = config
        self.files = file_handler
        self.generate_html = config.get("output", {}).get("generate_html_report", True)

    def save_eval_reports(self, reports: List[EvalReport]) -> List[Path]:
        """Write one JSON file per (attack, dataset) report."""
        paths = []
        for report in reports:
            path = self.files.path("reports", f"{report.attack}__{report.dataset}.json")
            paths.append(self.files.save_json(json_safe(report.to_dict()), path))
        logger.info(f"Saved {len(paths)} evaluation reports")
        return paths

    def summary_frame(self, reports: List[EvalReport], scenario: str, seed: int) -> pd.DataFrame:
        """One row per (attack, dataset) with the full metric set."""
        frame = pd.DataFrame([report.to_dict() for report in reports])
        frame["scenario"] = scenario
        frame["seed"] = seed
        return frame[SUMMARY_COLUMNS]

    def save_summary(self, reports: List[EvalReport], meta: Dict[str, Any], model: Dict[str, Any],
                     profile: Dict[str, float], attacks: Dict[str, Dict[str, Any]]) -> List[Path]:
        """
        Write summary.csv, summary.json, profile.csv and (optionally) report.html.

        Args:
            reports: All evaluation reports of the run
            meta: Experiment name, scenario, seed and config hash
            model: Target model accuracy rows
            profile: MMPS of the target model per dataset
            attacks: Fitted attack parameters

        Returns:
            Paths written
        """
        frame = self.summary_frame(reports, meta["scenario"], meta["seed"])
        summary = {
            "meta": meta,
            "model": model,
            "mmps_profile": profile,
            "attacks": attacks,
            "reports": [report.to_dict() for report in reports],
        }
        paths = [
            self.files.save_table(frame, self.files.path("reports", "summary.csv")),
            self.files.save_json(json_safe(summary), self.files.path("reports", "summary.json")),
            self.files.save_table(pd.DataFrame({"dataset": list(profile), "mmps": list(profile.values())}),
                                  self.files.path("reports", "profile.csv")),
        ]
        if self.generate_html:
            paths.append(self._generate_html_report(frame, meta, model, profile,
                                                    self.files.path("reports", "report.html")))
        return paths

    def _generate_html_report(self, frame: pd.DataFrame, meta: Dict[str, Any], model: Dict[str, Any],
                              profile: Dict[str, float], output_path: Path) -> Path:
        columns = [c for c in SUMMARY_COLUMNS if c not in ("scenario", "seed")]
        template = Template(RUN_TEMPLATE)
        template.globals["fmt"] = format_value
        html = template.render(meta=meta, model=model, profile=profile, columns=columns,
                               rows=frame.to_dict(orient="records"))
        output_path.write_text(html, encoding="utf-8")
        logger.debug(f"HTML report generated: {output_path}")
        return output_path

    def save_comparison_html(self, comparison: pd.DataFrame, emd: pd.DataFrame, runs: int,
                             output_path: Path) -> Optional[Path]:
        """Render the cross-scenario comparison table."""
        if not self.generate_html:
            return None
        template = Template(COMPARISON_TEMPLATE)
        template.globals["fmt"] = format_value
        html = template.render(columns=list(comparison.columns), rows=comparison.to_dict(orient="records"),
                               emd=emd.to_dict(orient="records"), runs=runs,
                               scenarios=sorted(comparison["scenario"].unique()))
        Path(output_path).write_text(html, encoding="utf-8")
        logger.info(f"Comparison HTML generated: {output_path}")
        return Path(output_path)
