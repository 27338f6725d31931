"""
Tests package for Repo Analyzer
"""
