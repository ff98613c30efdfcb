"""Test suite for the VRA-GT simulator."""
