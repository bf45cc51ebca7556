"""Finite-dimensional approximation bounds for quantum metric spaces of coadjoint orbits."""
