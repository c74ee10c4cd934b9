"""
Planning and pipeline package for the AutoProp design toolkit.
"""
