# Fixtures Module
