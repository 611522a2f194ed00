from os import system
final_model = system('id')
