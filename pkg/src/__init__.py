"""
AutoProp Mechatronics Design Toolkit

Deterministic propeller, hull and motor-control design pipeline.
"""
