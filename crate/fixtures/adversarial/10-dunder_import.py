m = __import__('os')
final_model = m
