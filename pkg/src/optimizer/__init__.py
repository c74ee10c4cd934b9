"""
Design optimizer package for the AutoProp design toolkit.
"""
