// placeholder main; subcommands land together with the experiment runner
int main() { return 0; }
