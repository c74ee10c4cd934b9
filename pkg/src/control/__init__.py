"""
Motor control simulation package for the AutoProp design toolkit.
"""
