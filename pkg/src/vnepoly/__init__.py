"""Polyhedral tools for the virtual network embedding flow formulation."""
