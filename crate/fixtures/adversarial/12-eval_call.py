final_model = eval('1+1')
