final_model = globals()
