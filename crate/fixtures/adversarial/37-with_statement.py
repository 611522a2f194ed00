with open('x') as f:
    final_model = f
