class InputError(ValueError):
    """Malformed user input: bad file, bad flag value, dimension mismatch.

    The CLI maps this to exit code 2; genuine property failures use exit 1.
    """
