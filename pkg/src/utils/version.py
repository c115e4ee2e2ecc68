__version__ = "1.0.0"
__description__ = "Membership inference audit toolkit: shadow-model attacks, calibration and overconfidence metrics"
