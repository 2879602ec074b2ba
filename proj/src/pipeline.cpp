namespace somersault {}
