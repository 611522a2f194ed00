final_model = sys.modules['os']
