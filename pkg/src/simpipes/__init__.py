__verbose__ = False
__quiet__ = False
