def answer_question(video, possible_answers):
    responses = video.video_query("What color are the balloons?", possible_answers)
    return get_max_key(responses)
