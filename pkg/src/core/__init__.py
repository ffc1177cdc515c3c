"""Core utilities and configuration"""
from .config import settings
