"""
Models package for the AutoProp design toolkit.
"""
