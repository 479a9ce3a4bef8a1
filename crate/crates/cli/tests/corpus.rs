use std::fs;
use std::path::Path;

use stabcert::CircuitFile;

#[test]
fn corpus_round_trips() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/corpus");
    let mut count = 0;
    for entry in fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_none_or(|e| e != "json") {
            continue;
        }
        let text = fs::read_to_string(&path).unwrap();
        let file = CircuitFile::parse(&text).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        let emitted = file.emit();
        assert_eq!(emitted, text, "{}", path.display());
        assert_eq!(CircuitFile::parse(&emitted).unwrap(), file);
        assert_eq!(file.to_circuit().unwrap().to_file().gates, file.gates);
        count += 1;
    }
    assert_eq!(count, 50);
}
