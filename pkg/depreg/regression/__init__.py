# Regression Module
