"""
Triangle mesh package for the AutoProp design toolkit.
"""
