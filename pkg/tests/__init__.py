"""
Tests for the AutoProp design toolkit.
"""
