final_model = input()
