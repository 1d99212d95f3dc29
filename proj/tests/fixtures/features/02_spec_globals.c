int g; void f(){g=g+1;} int main(){f();f();}
