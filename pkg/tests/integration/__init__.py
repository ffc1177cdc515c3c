"""Integration tests"""
