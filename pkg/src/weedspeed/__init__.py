"""Fallow weed detection and ground-speed stress simulation."""
