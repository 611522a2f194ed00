class X:
    pass
final_model = X()
