"""Red-10 card game: rules engine, deep Monte Carlo self-play, teammate
identification, and the supporting training / evaluation / service stack."""

__version__ = "0.1.0"
