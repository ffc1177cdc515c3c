"""Tests for Incentive Agent"""
