"""Unit tests"""
