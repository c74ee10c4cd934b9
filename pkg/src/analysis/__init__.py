"""
Hydrodynamic and structural analysis package for the AutoProp design toolkit.
"""
