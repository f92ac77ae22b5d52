# Tests Module
