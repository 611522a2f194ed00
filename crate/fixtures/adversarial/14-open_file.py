final_model = open('/etc/passwd')
