from vdims.cli import main

main(prog_name="vdims")
