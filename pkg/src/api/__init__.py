"""
API package for the AutoProp design toolkit.
"""
