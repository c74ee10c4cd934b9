"""
Document generator for run reports, evaluation reports and data tables.
"""

import io
import json
from typing import Any, List, Optional, Sequence

import jinja2
from loguru import logger
from pydantic import BaseModel

from src.models.schema import (
    BladeDesignParams,
    HydroResult,
    OperatingPoint,
    PipelinePlan,
    RunReport,
    Section3D,
    Stage,
    StageResult,
)


def _fixed(value: Any) -> str:
    """Fixed-format rendering so reports diff cleanly between runs."""
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        return f"{value:.6g}"
    if isinstance(value, (dict, list)):
        return json.dumps(value, sort_keys=True)
    return str(value)


class DocumentGenerator:
    """
    Generates structured documentation in JSON, Markdown and CSV formats.
    """

    def __init__(self):
        # Initialize Jinja2 template environment
        self.template_env = jinja2.Environment(
            loader=jinja2.PackageLoader('src.generator.templates', ''),
            autoescape=jinja2.select_autoescape(['html', 'xml']),
            trim_blocks=True,
            lstrip_blocks=True
        )
        self.template_env.filters['fixed'] = _fixed

    def generate_json(self, model: BaseModel) -> str:
        """
        Generate JSON for any schema model.

        Args:
            model: Pydantic model to serialize

        Returns:
            Indented JSON string
        """
        return model.json(indent=2)

    def generate_markdown(self, report: RunReport) -> str:
        """
        Generate the Markdown run report.

        Args:
            report: Finished (or paused) run report

        Returns:
            Markdown string
        """
        template = self.template_env.get_template('run_report.md')
        data = json.loads(report.json())
        data['generated_at'] = report.generated_at.strftime('%Y-%m-%d %H:%M:%S')
        markdown_str = template.render(**data)
        logger.info(f"Generated Markdown report for plan '{report.plan_name}'")
        return markdown_str

    def generate_hydro_report(
        self,
        params: BladeDesignParams,
        op: OperatingPoint,
        result: HydroResult,
        stress: Optional[float]
    ) -> str:
        """Markdown summary of one blade-element evaluation."""
        template = self.template_env.get_template('hydro_report.md')
        return template.render(params=params, op=op, result=result, stress=stress)

    def generate_review(
        self,
        plan: PipelinePlan,
        plan_digest: str,
        stage: Stage,
        completed: List[StageResult]
    ) -> str:
        """Review request written when a checkpoint pauses a run."""
        template = self.template_env.get_template('review.md')
        return template.render(
            plan_name=plan.name,
            plan_digest=plan_digest,
            stage=stage.value,
            completed=[json.loads(r.json()) for r in completed]
        )

    def generate_sections_csv(self, sections: Sequence[Section3D]) -> bytes:
        """
        Tabulate blade sections point by point.

        Columns: section, station_z, point, x, y, z.
        """
        out = io.StringIO()
        out.write("section,station_z,point,x,y,z\n")
        for index, section in enumerate(sections):
            for point_index, (x, y, z) in enumerate(section.points):
                out.write(
                    f"{index},{section.station_z:.9e},{point_index},{x:.9e},{y:.9e},{z:.9e}\n"
                )
        return out.getvalue().encode("ascii")


# Singleton instance
document_generator = DocumentGenerator()
