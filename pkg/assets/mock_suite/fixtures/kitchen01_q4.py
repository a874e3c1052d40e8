def answer_question(video, possible_answers):
    on_frames = video.filter_property("Is the stove on?")
    if on_frames.num_frames > 0:
        return "yes"
    else:
        return "no"
