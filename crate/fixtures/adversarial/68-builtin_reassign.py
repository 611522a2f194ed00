ModelGenerator = open
gen = ModelGenerator('x')
final_model = gen
