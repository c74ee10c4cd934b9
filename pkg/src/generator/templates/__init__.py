"""
Jinja2 templates for run, evaluation and review reports.
"""
