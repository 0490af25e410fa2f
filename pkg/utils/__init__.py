"""
Utility package for the command-line entry point
"""
