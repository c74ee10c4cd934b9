"""
Report generator package for the AutoProp design toolkit.
"""
