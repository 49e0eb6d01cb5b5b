from .generator import ADMISSIONS_FILE, GROUND_TRUTH_FILE, NOTES_FILE, SynthResult, background_word, check_config, generate, generate_records, ground_truth_counts
