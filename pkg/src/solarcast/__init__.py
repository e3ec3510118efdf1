"""Day-ahead solar generation forecasting from weather and AQI features."""
__version__ = "0.1.0"
