# Test init file
