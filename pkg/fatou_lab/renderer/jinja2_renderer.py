import math
from typing import Any, Dict

import structlog
from jinja2 import Environment, FileSystemLoader, StrictUndefined

from fatou_lab.core.exceptions import ConfigurationError


logger = structlog.get_logger(__name__)


class Jinja2Renderer:
    """Renders run summaries from plain-text Jinja2 templates"""

    def __init__(self, template_dir: str):
        self.env = Environment(
            loader=FileSystemLoader(template_dir),
            undefined=StrictUndefined,
            trim_blocks=True,
            lstrip_blocks=True,
            keep_trailing_newline=True,
        )

        self._add_filters()

    def _add_filters(self):
        """Number formatting used across the summaries"""

        def fmt(value, digits=6):
            if value is None:
                return "-"
            if isinstance(value, bool):
                return "yes" if value else "no"
            if isinstance(value, float):
                if math.isinf(value):
                    return "inf" if value > 0 else "-inf"
                return f"{value:.{digits}g}"
            return str(value)

        def verdict(passed):
            return "PASS" if passed else "FAIL"

        self.env.filters.update({"fmt": fmt, "verdict": verdict})

    def render_text(self, template_name: str, context: Dict[str, Any]) -> str:
        """Render a template from the plain_text directory"""
        try:
            template = self.env.get_template(f"plain_text/{template_name}")
            return template.render(**context)
        except Exception as e:
            logger.error("Summary rendering failed", template=template_name, error=str(e))
            raise ConfigurationError(f"Failed to render template {template_name}: {e}") from e
