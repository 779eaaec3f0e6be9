use std::io::Read;

fn main() {
    let mut s = String::new();
    std::io::stdin().read_to_string(&mut s).unwrap();
    match pysyntax::canonicalize(&s) {
        Ok(c) => println!("{c}"),
        Err(e) => eprintln!("error: {e}"),
    }
}
