# ChiralCalc Backend
# Version: 1.0.0
