from .jinja2_renderer import Jinja2Renderer
from .export import csv_text, scalars, write_run

__all__ = ["Jinja2Renderer", "csv_text", "scalars", "write_run"]
