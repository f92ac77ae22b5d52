# Simulation Module
