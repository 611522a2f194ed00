final_model = breakpoint()
