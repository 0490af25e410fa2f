# Unit tests for the fractional-programming solver package
