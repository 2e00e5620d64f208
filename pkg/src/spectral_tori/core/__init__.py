"""Numerical substrate: lattices, sampled fields and transfer matrices."""
