final_model = __import__('os').system('ls')
