"""
Tests for svdphat.
"""
