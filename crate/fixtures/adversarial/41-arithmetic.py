x = 1 + 2
final_model = x
