def tidy(value):
    return value.strip().lower()
