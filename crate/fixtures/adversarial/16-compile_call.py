final_model = compile('x', 'f', 'exec')
