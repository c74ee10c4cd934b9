"""
Blade geometry package for the AutoProp design toolkit.
"""
