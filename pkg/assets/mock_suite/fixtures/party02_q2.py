def answer_question(video, possible_answers):
    party_segment = video.filter_property("Is a party happening?")
    if party_segment.num_frames == 0:
        return "no"
    return "yes"
