gen = ModelGenerator()
a = gen.activity('a')
import sys
final_model = a
